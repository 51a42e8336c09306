#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "svaug/eval.hpp"

namespace svaug {

struct ExperimentConfig {
  std::string corpus_path;
  FeedFormat corpus_format = FeedFormat::NativeCsv;
  std::vector<CvssMetric> tasks;        // default: all seven
  std::vector<Technique> techniques;    // None is always included
  std::vector<ModelKind> models;        // default: random forest
  bool use_full_grid = false;
  std::vector<uint64_t> seeds;          // default: {1}
  double change_fraction = 0.2;
  bool allow_fraction_above_cap = false;
  double pool_min_doc_fraction = 0.001;
  double vocab_min_doc_fraction = 0.001;
  std::string assets_dir = "assets";
  std::string out_dir = "out";
  bool dump_features = false;

  static ExperimentConfig from_json(std::string_view text);
  static ExperimentConfig from_json_file(const std::string& path);
  std::string to_json() const;
  void normalize();  // fills defaults, dedups, forces None in
};

struct SeedRoundResult {
  uint64_t seed = 0;
  RoundResult result;
};

struct ReportRow {
  CvssMetric task;
  ModelKind model;
  Technique technique;
  double mean_validation_mcc = 0.0;
  double mean_test_mcc = 0.0;
  double mean_test_f1 = 0.0;
};

struct ComparisonRow {
  ModelKind model;
  Technique technique;  // compared against None
  WilcoxonResult stats;
  bool computed = false;
  std::string note;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<SeedRoundResult> rounds;
  std::vector<ReportRow> rows;
  std::vector<ComparisonRow> comparisons;
  std::vector<TaskCentroidReport> centroids;  // when Combination was run
  std::vector<std::string> asset_hashes;      // "name fnv64(hex)"

  std::string to_csv() const;
  std::string to_markdown() const;
  std::string to_plot_tsv() const;
  std::string centroids_csv() const;
  std::string results_json() const;
};

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const Corpus& corpus);

// Rebuilds rows/comparisons from raw round results (report regeneration).
ExperimentReport report_from_results_json(std::string_view text);

void write_report_files(const ExperimentReport& report,
                        const std::string& out_dir, double elapsed_seconds);

struct PreviewEdit {
  std::string op;  // insert / delete / substitute / synonym / rewrite
  size_t position = 0;
  std::string before;
  std::string after;
};

struct PreviewResult {
  std::string original;
  std::string augmented;
  size_t budget = 0;
  std::vector<PreviewEdit> edits;
  std::string note;
};

PreviewResult augment_preview(const std::string& text, Technique technique,
                              uint64_t seed, double change_fraction,
                              const FrequentWordPool& pool,
                              const SynonymLexicon& lexicon,
                              ContextualClient& client);

// CLI entry points; return process exit codes.
int cmd_ingest(const std::vector<std::string>& feeds,
               const std::vector<std::string>& csvs, const std::string& out);
int cmd_run(const ExperimentConfig& config);
int cmd_augment_preview(const std::string& text, const std::string& technique,
                        uint64_t seed, double change_fraction,
                        const std::string& assets_dir,
                        const std::string& corpus_path,
                        bool allow_large_edits);
int cmd_report(const std::string& results_path, const std::string& out_dir);

}  // namespace svaug
