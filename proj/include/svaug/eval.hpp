#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "svaug/augment.hpp"
#include "svaug/corpus.hpp"
#include "svaug/forest.hpp"

namespace svaug {

struct FoldRange {
  uint32_t begin = 0;  // [begin, end) into the sorted corpus
  uint32_t end = 0;
  uint32_t size() const { return end - begin; }
};

// Five contiguous folds over the time-sorted corpus; sizes differ by at most
// one, the remainder going to the earliest folds.
struct TimeFolds {
  std::array<FoldRange, 5> folds;
};
TimeFolds split_time_folds(const Corpus& corpus);

// Round i (1-based, 1..3): train folds 1..i, validate fold i+1, test i+2.
struct RoundSpec {
  int round = 1;
  FoldRange train;
  FoldRange validation;
  FoldRange test;
};
RoundSpec round_spec(const TimeFolds& folds, int round);

struct ConfusionMatrix {
  std::array<std::array<uint64_t, kNumClasses>, kNumClasses> m{};  // [true][pred]

  uint64_t total() const;
  static ConfusionMatrix from_predictions(const std::vector<uint32_t>& truth,
                                          const std::vector<uint32_t>& pred);
};

// Gorodkin's multiclass MCC; 0.0 when the denominator vanishes.
double multiclass_mcc(const ConfusionMatrix& cm);

// Macro F1 over classes present in truth or prediction; a class whose
// precision+recall denominator is zero contributes F1 = 0.
double macro_f1(const ConfusionMatrix& cm);

struct WilcoxonResult {
  bool no_difference = false;  // every pair tied
  size_t n_pairs = 0;          // after dropping zero differences
  double w_plus = 0.0;
  double w_minus = 0.0;
  double z = 0.0;              // signed: positive when a tends above b
  double p_two_sided = 1.0;
  double effect_size_r = 0.0;  // |z| / sqrt(n)
  std::string magnitude;       // negligible / small / medium / large
  bool significant = false;    // p < 0.01
};

// Paired signed-rank test with average ranks for ties, tie-corrected normal
// approximation and continuity correction. Needs >= 5 nonzero differences.
WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b);
std::string_view effect_magnitude(double r);

struct ModelGrid {
  ModelKind kind = ModelKind::RandomForest;
  std::vector<ForestParams> forest_points;
  std::vector<LogRegParams> logreg_points;

  size_t size() const;
  std::string point_summary(size_t i) const;
};
ModelGrid desk_grid(ModelKind kind);
ModelGrid full_grid(ModelKind kind);

// First index achieving the maximum; scaling all scores by a positive
// constant cannot change the winner.
size_t select_grid_point(const std::vector<double>& mean_validation_mcc);

struct RoundResult {
  CvssMetric task = CvssMetric::AccessVector;
  ModelKind model = ModelKind::RandomForest;
  Technique technique = Technique::None;
  std::string hyperparams;
  int round = 1;
  double validation_mcc = 0.0;
  double test_mcc = 0.0;
  double test_macro_f1 = 0.0;
  ConfusionMatrix validation_cm;
  ConfusionMatrix test_cm;
  std::vector<std::string> flags;
};

struct EvalContext {
  const StopWordSet* stops = nullptr;
  const SynonymLexicon* lexicon = nullptr;
  ContextualClient* client = nullptr;
  double vocab_min_doc_fraction = 0.001;

  // Lazily filled per-record preprocessing cache, keyed by corpus index.
  mutable std::vector<TokenizedDoc> doc_cache;
  mutable std::vector<bool> doc_cached;
  mutable StemCache stem_cache;

  const TokenizedDoc& doc_for(const Corpus& corpus, uint32_t index) const;
};

struct GridSearchOutcome {
  std::vector<RoundResult> rounds;  // the three rounds of the winning point
  size_t selected_index = 0;
  double selected_mean_validation_mcc = 0.0;
};

// Grid selection by mean validation MCC over the three rounds (ties: first
// point in grid order). Balancing touches only the training folds; the
// balanced set is shared across grid points of a round.
GridSearchOutcome run_grid(const Corpus& corpus, CvssMetric task,
                           const ModelGrid& grid, const AugmentationPlan& plan,
                           const EvalContext& ctx);

struct CentroidStats {
  std::array<double, kNumClasses> same_mean{};
  std::array<double, kNumClasses> other_mean{};  // max over other classes
  std::array<uint64_t, kNumClasses> n_augmented{};
  std::array<bool, kNumClasses> excluded{};  // no augmented samples
  double task_same = 0.0;   // weighted by n_augmented
  double task_other = 0.0;
};

// Average cosine similarity between each augmented vector and the original
// per-class centroids: its own class vs the strongest other class.
CentroidStats centroid_similarity(const std::vector<SparseVector>& augmented,
                                  const std::vector<uint32_t>& augmented_class,
                                  const std::vector<SparseVector>& originals,
                                  const std::vector<uint32_t>& original_class);

struct TaskCentroidReport {
  CvssMetric task = CvssMetric::AccessVector;
  double same = 0.0;
  double other = 0.0;
  uint64_t n_augmented = 0;
};

// Runs the balance step per round with the given plan and aggregates
// centroid similarities over the three rounds.
TaskCentroidReport centroid_analysis(const Corpus& corpus, CvssMetric task,
                                     const AugmentationPlan& plan,
                                     const EvalContext& ctx);

}  // namespace svaug
