#include <cstdio>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svaug/error.hpp"
#include "svaug/harness.hpp"

namespace {

struct RunFlags {
  std::string config_path;
  std::string corpus;
  std::string corpus_format;
  std::vector<std::string> tasks;
  std::vector<std::string> techniques;
  std::vector<std::string> models;
  std::vector<uint64_t> seeds;
  bool full_grid = false;
  double change_fraction = -1.0;
  bool allow_large_edits = false;
  std::string assets_dir;
  std::string out_dir;
  bool dump_features = false;
};

// CLI flags win over the config file.
svaug::ExperimentConfig merge_config(const RunFlags& flags) {
  svaug::ExperimentConfig cfg;
  if (!flags.config_path.empty())
    cfg = svaug::ExperimentConfig::from_json_file(flags.config_path);
  if (!flags.corpus.empty()) cfg.corpus_path = flags.corpus;
  if (!flags.corpus_format.empty()) {
    auto f = svaug::feed_format_from_name(flags.corpus_format);
    if (!f) svaug::throw_input("unknown corpus format: " + flags.corpus_format);
    cfg.corpus_format = *f;
  }
  if (!flags.tasks.empty()) {
    cfg.tasks.clear();
    for (const auto& name : flags.tasks) {
      auto m = svaug::metric_from_name(name);
      if (!m) svaug::throw_input("unknown task: " + name);
      cfg.tasks.push_back(*m);
    }
  }
  if (!flags.techniques.empty()) {
    cfg.techniques.clear();
    for (const auto& name : flags.techniques) {
      auto t = svaug::technique_from_name(name);
      if (!t) svaug::throw_input("unknown technique: " + name);
      cfg.techniques.push_back(*t);
    }
  }
  if (!flags.models.empty()) {
    cfg.models.clear();
    for (const auto& name : flags.models) {
      auto m = svaug::model_kind_from_name(name);
      if (!m) svaug::throw_input("unknown model: " + name);
      cfg.models.push_back(*m);
    }
  }
  if (!flags.seeds.empty()) cfg.seeds = flags.seeds;
  if (flags.full_grid) cfg.use_full_grid = true;
  if (flags.change_fraction >= 0.0) cfg.change_fraction = flags.change_fraction;
  if (flags.allow_large_edits) cfg.allow_fraction_above_cap = true;
  if (!flags.assets_dir.empty()) cfg.assets_dir = flags.assets_dir;
  if (!flags.out_dir.empty()) cfg.out_dir = flags.out_dir;
  if (flags.dump_features) cfg.dump_features = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vulnerability description augmentation and assessment runner"};
  app.require_subcommand(1);

  // ingest
  auto* ingest = app.add_subcommand(
      "ingest", "Parse vulnerability feeds into the native CSV corpus");
  std::vector<std::string> feeds, csvs;
  std::string ingest_out;
  ingest->add_option("--feed", feeds, "NVD JSON 1.1 feed file (repeatable)");
  ingest->add_option("--csv", csvs, "native CSV corpus file (repeatable)");
  ingest->add_option("--out", ingest_out, "output corpus CSV path")
      ->required();

  // run
  auto* run = app.add_subcommand("run", "Run the augmentation experiment");
  RunFlags flags;
  run->add_option("--config", flags.config_path, "experiment config (JSON)");
  run->add_option("--corpus", flags.corpus, "corpus file");
  run->add_option("--corpus-format", flags.corpus_format,
                  "csv or nvd-json-1.1");
  run->add_option("--tasks", flags.tasks, "metrics to predict")
      ->delimiter(',');
  run->add_option("--techniques", flags.techniques, "balancing techniques")
      ->delimiter(',');
  run->add_option("--models", flags.models, "model families")->delimiter(',');
  run->add_option("--seed", flags.seeds, "experiment seed (repeatable)")
      ->delimiter(',');
  run->add_flag("--full-grid", flags.full_grid,
                "use the full hyperparameter grid");
  run->add_option("--change-fraction", flags.change_fraction,
                  "token edit fraction per document");
  run->add_flag("--allow-large-edits", flags.allow_large_edits,
                "permit change fractions above 0.2");
  run->add_option("--assets", flags.assets_dir, "assets directory");
  run->add_option("--out-dir", flags.out_dir, "report output directory");
  run->add_flag("--dump-features", flags.dump_features,
                "also write whole-corpus tf-idf triplets");

  // augment-preview
  auto* preview = app.add_subcommand(
      "augment-preview", "Show one augmentation of a single text");
  std::string text, text_file, technique = "combination";
  uint64_t preview_seed = 1;
  double preview_fraction = 0.2;
  std::string preview_assets = "assets", preview_corpus;
  bool preview_allow_large = false;
  preview->add_option("--text", text, "text to augment");
  preview->add_option("--text-file", text_file, "file holding the text");
  preview->add_option("--technique", technique, "augmentation technique")
      ->required();
  preview->add_option("--seed", preview_seed, "random seed");
  preview->add_option("--change-fraction", preview_fraction,
                      "token edit fraction");
  preview->add_option("--assets", preview_assets, "assets directory");
  preview->add_option("--corpus", preview_corpus,
                      "corpus to build the word pool from");
  preview->add_flag("--allow-large-edits", preview_allow_large,
                    "permit change fractions above 0.2");

  // report
  auto* report = app.add_subcommand(
      "report", "Regenerate report files from results.json");
  std::string results_path, report_out = "out";
  report->add_option("--results", results_path, "results.json path")
      ->required();
  report->add_option("--out-dir", report_out, "report output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (app.got_subcommand(ingest))
      return svaug::cmd_ingest(feeds, csvs, ingest_out);
    if (app.got_subcommand(run)) return svaug::cmd_run(merge_config(flags));
    if (app.got_subcommand(preview)) {
      if (text.empty() && text_file.empty())
        svaug::throw_input("augment-preview needs --text or --text-file");
      if (!text_file.empty()) text = svaug::read_file(text_file);
      return svaug::cmd_augment_preview(text, technique, preview_seed,
                                        preview_fraction, preview_assets,
                                        preview_corpus, preview_allow_large);
    }
    if (app.got_subcommand(report))
      return svaug::cmd_report(results_path, report_out);
  } catch (const svaug::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  }
  return 0;
}
