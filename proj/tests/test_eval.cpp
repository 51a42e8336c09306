#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "svaug/augment.hpp"
#include "svaug/error.hpp"
#include "svaug/eval.hpp"

using namespace svaug;

namespace {

ConfusionMatrix cm_from(std::array<std::array<uint64_t, 3>, 3> rows) {
  ConfusionMatrix cm;
  for (size_t t = 0; t < 3; ++t)
    for (size_t p = 0; p < 3; ++p) cm.m[t][p] = rows[t][p];
  return cm;
}

SparseVector dense2(double x0, double x1) {
  SparseVector v;
  v.dims = 2;
  if (x0 != 0.0) v.entries.emplace_back(0, x0);
  if (x1 != 0.0) v.entries.emplace_back(1, x1);
  return v;
}

// Sorted corpus with an alternating textual signal on access vector.
// Records from `all_network_from` onward are all class Network.
Corpus eval_corpus(size_t n, size_t all_network_from = SIZE_MAX) {
  Corpus c;
  for (size_t i = 0; i < n; ++i) {
    VulnRecord r;
    r.id = "CVE-2000-" + std::to_string(1000 + i);
    r.published = 946684800 + static_cast<int64_t>(i) * 86400;
    bool network = (i % 2 == 0) || i >= all_network_from;
    uint8_t conf = (i % 4 == 0) ? 0 : 1;
    if (network) {
      r.description = "A remote network flaw in service s" +
                      std::to_string(i) +
                      " lets an attacker send crafted packets to the daemon.";
      r.labels = {2, 2, 2, conf, 1, 1, 1};
    } else {
      r.description = "A local console flaw in utility u" + std::to_string(i) +
                      " lets a user gain elevated privileges on the host.";
      r.labels = {0, 2, 2, conf, 1, 1, 1};
    }
    c.records.push_back(std::move(r));
  }
  return c;
}

ModelGrid tiny_grid() {
  ModelGrid grid;
  grid.kind = ModelKind::RandomForest;
  ForestParams a;
  a.n_trees = 5;
  a.max_depth = 3;
  a.max_leaf_nodes = 8;
  ForestParams b = a;
  b.n_trees = 9;
  grid.forest_points = {a, b};
  return grid;
}

constexpr double kTol = 1e-12;

}  // namespace

TEST_SUITE("eval") {

TEST_CASE("confusion matrix from predictions") {
  ConfusionMatrix cm =
      ConfusionMatrix::from_predictions({0, 1, 2, 1, 0}, {0, 1, 1, 1, 2});
  CHECK(cm.m[0][0] == 1);
  CHECK(cm.m[0][2] == 1);
  CHECK(cm.m[1][1] == 2);
  CHECK(cm.m[2][1] == 1);
  CHECK(cm.total() == 5);
  CHECK_THROWS_AS(ConfusionMatrix::from_predictions({0, 1}, {0}), Error);
  CHECK_THROWS_AS(ConfusionMatrix::from_predictions({7}, {0}), Error);
}

TEST_CASE("matthews correlation on known matrices") {
  CHECK(multiclass_mcc(cm_from({{{5, 0, 0}, {0, 3, 0}, {0, 0, 2}}})) ==
        doctest::Approx(1.0).epsilon(kTol));
  CHECK(multiclass_mcc(cm_from({{{0, 5, 0}, {5, 0, 0}, {0, 0, 0}}})) ==
        doctest::Approx(-1.0).epsilon(kTol));
  CHECK(multiclass_mcc(cm_from({{{1, 1, 1}, {1, 1, 1}, {1, 1, 1}}})) ==
        doctest::Approx(0.0).epsilon(kTol));
  CHECK(multiclass_mcc(cm_from({{{4, 1, 0}, {2, 3, 1}, {0, 2, 5}}})) ==
        doctest::Approx(0.50233101496735277).epsilon(kTol));
  // Degenerate cases: empty and single-class matrices have no correlation.
  CHECK(multiclass_mcc(ConfusionMatrix{}) == 0.0);
  CHECK(multiclass_mcc(cm_from({{{7, 0, 0}, {0, 0, 0}, {0, 0, 0}}})) == 0.0);
}

TEST_CASE("macro f1 averages only classes that occur") {
  CHECK(macro_f1(cm_from({{{5, 0, 0}, {0, 3, 0}, {0, 0, 2}}})) ==
        doctest::Approx(1.0).epsilon(kTol));
  CHECK(macro_f1(cm_from({{{4, 1, 0}, {2, 3, 1}, {0, 2, 5}}})) ==
        doctest::Approx(0.66550116550116556).epsilon(kTol));
  // Class 2 appears in neither truth nor prediction, so it is skipped.
  CHECK(macro_f1(cm_from({{{3, 1, 0}, {0, 2, 0}, {0, 0, 0}}})) ==
        doctest::Approx(0.82857142857142851).epsilon(kTol));
  CHECK(macro_f1(ConfusionMatrix{}) == 0.0);
}

TEST_CASE("signed-rank test matches reference values") {
  std::vector<double> a = {0.52, 0.48, 0.61, 0.55, 0.49, 0.58, 0.44, 0.50};
  std::vector<double> b = {0.47, 0.45, 0.61, 0.50, 0.46, 0.51, 0.47, 0.42};
  WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK_FALSE(r.no_difference);
  CHECK(r.n_pairs == 7);
  CHECK(r.w_plus == doctest::Approx(26.0).epsilon(kTol));
  CHECK(r.w_minus == doctest::Approx(2.0).epsilon(kTol));
  CHECK(r.z == doctest::Approx(1.9614465904716158).epsilon(kTol));
  CHECK(r.p_two_sided == doctest::Approx(0.049826949600503934).epsilon(kTol));
  CHECK(r.effect_size_r == doctest::Approx(0.7413571269033498).epsilon(kTol));
  CHECK(r.magnitude == "large");
  CHECK_FALSE(r.significant);

  // Swapping the samples flips the sign but not the p-value.
  WilcoxonResult s = wilcoxon_signed_rank(b, a);
  CHECK(s.z == doctest::Approx(-r.z).epsilon(kTol));
  CHECK(s.p_two_sided == doctest::Approx(r.p_two_sided).epsilon(kTol));
  CHECK(s.w_plus == doctest::Approx(r.w_minus).epsilon(kTol));
}

TEST_CASE("signed-rank test with tied absolute differences") {
  std::vector<double> a = {1, 2, 3, 4, 5, 6};
  std::vector<double> b = {1.5, 1.0, 3.5, 3.0, 5.5, 5.0};
  WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.n_pairs == 6);
  CHECK(r.w_plus == doctest::Approx(15.0).epsilon(kTol));
  CHECK(r.w_minus == doctest::Approx(6.0).epsilon(kTol));
  CHECK(r.z == doctest::Approx(0.8576900278702358).epsilon(kTol));
  CHECK(r.p_two_sided == doctest::Approx(0.3910636479405158).epsilon(kTol));
  CHECK(r.effect_size_r == doctest::Approx(0.3501504876259268).epsilon(kTol));
  CHECK(r.magnitude == "medium");
}

TEST_CASE("a consistent shift comes out significant") {
  // 0.25 is exactly representable, so all ten differences tie.
  std::vector<double> b = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> a;
  for (double v : b) a.push_back(v + 0.25);
  WilcoxonResult r = wilcoxon_signed_rank(a, b);
  CHECK(r.n_pairs == 10);
  CHECK(r.w_plus == doctest::Approx(55.0).epsilon(kTol));
  CHECK(r.z == doctest::Approx(3.1047817027107723).epsilon(kTol));
  CHECK(r.p_two_sided == doctest::Approx(0.0019041950430043904).epsilon(kTol));
  CHECK(r.significant);
  CHECK(r.magnitude == "large");
}

TEST_CASE("signed-rank edge cases") {
  std::vector<double> same = {0.5, 0.6, 0.7, 0.8, 0.9};
  WilcoxonResult r = wilcoxon_signed_rank(same, same);
  CHECK(r.no_difference);
  CHECK(r.n_pairs == 0);
  CHECK(r.p_two_sided == 1.0);

  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2}, {3, 4}), Error);
  CHECK_THROWS_AS(wilcoxon_signed_rank({1, 2, 3}, {1, 2}), Error);
  // Five pairs but only four nonzero differences.
  CHECK_THROWS_AS(
      wilcoxon_signed_rank({1, 2, 3, 4, 5}, {1, 2.5, 3.5, 4.5, 5.5}), Error);
}

TEST_CASE("effect magnitude bands") {
  CHECK(effect_magnitude(0.0) == "negligible");
  CHECK(effect_magnitude(0.1) == "negligible");
  CHECK(effect_magnitude(0.1000001) == "small");
  CHECK(effect_magnitude(0.3) == "small");
  CHECK(effect_magnitude(0.31) == "medium");
  CHECK(effect_magnitude(0.5) == "medium");
  CHECK(effect_magnitude(0.51) == "large");
  CHECK(effect_magnitude(0.99) == "large");
}

TEST_CASE("time folds are contiguous with the remainder up front") {
  Corpus corpus = eval_corpus(23);
  TimeFolds folds = split_time_folds(corpus);
  std::vector<uint32_t> sizes;
  uint32_t cursor = 0;
  for (const FoldRange& f : folds.folds) {
    CHECK(f.begin == cursor);
    cursor = f.end;
    sizes.push_back(f.size());
  }
  CHECK(cursor == 23);
  CHECK(sizes == std::vector<uint32_t>{5, 5, 5, 4, 4});

  Corpus five = eval_corpus(5);
  TimeFolds tiny = split_time_folds(five);
  for (const FoldRange& f : tiny.folds) CHECK(f.size() == 1);

  CHECK_THROWS_AS(split_time_folds(eval_corpus(4)), Error);

  Corpus shuffled = eval_corpus(10);
  std::swap(shuffled.records[2], shuffled.records[7]);
  try {
    split_time_folds(shuffled);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("not sorted") != std::string::npos);
  }
}

TEST_CASE("round specs walk forward in time") {
  Corpus corpus = eval_corpus(25);
  TimeFolds folds = split_time_folds(corpus);
  RoundSpec r1 = round_spec(folds, 1);
  CHECK(r1.train.begin == 0);
  CHECK(r1.train.end == 5);
  CHECK(r1.validation.begin == 5);
  CHECK(r1.validation.end == 10);
  CHECK(r1.test.begin == 10);
  CHECK(r1.test.end == 15);

  RoundSpec r3 = round_spec(folds, 3);
  CHECK(r3.train.begin == 0);
  CHECK(r3.train.end == 15);
  CHECK(r3.validation.begin == 15);
  CHECK(r3.validation.end == 20);
  CHECK(r3.test.begin == 20);
  CHECK(r3.test.end == 25);

  for (int round = 1; round <= 3; ++round) {
    RoundSpec spec = round_spec(folds, round);
    int64_t last_train = corpus.records[spec.train.end - 1].published;
    int64_t first_val = corpus.records[spec.validation.begin].published;
    int64_t last_val = corpus.records[spec.validation.end - 1].published;
    int64_t first_test = corpus.records[spec.test.begin].published;
    CHECK(last_train <= first_val);
    CHECK(last_val <= first_test);
  }

  CHECK_THROWS_AS(round_spec(folds, 0), Error);
  CHECK_THROWS_AS(round_spec(folds, 4), Error);
}

TEST_CASE("hyperparameter grids") {
  CHECK(desk_grid(ModelKind::RandomForest).size() == 1);
  CHECK(desk_grid(ModelKind::LogisticRegression).size() == 1);
  ModelGrid full = full_grid(ModelKind::RandomForest);
  CHECK(full.size() == 36);
  CHECK(full_grid(ModelKind::LogisticRegression).size() == 2);

  ModelGrid desk = desk_grid(ModelKind::RandomForest);
  CHECK(desk.forest_points[0].n_trees == 50);
  CHECK(desk.point_summary(0) == "trees=50,depth=7,leaves=100");
}

TEST_CASE("grid point selection takes the first maximum") {
  CHECK(select_grid_point({0.3, 0.5, 0.5}) == 1);
  CHECK(select_grid_point({0.7}) == 0);
  CHECK(select_grid_point({-0.2, -0.1, -0.4}) == 1);
  std::vector<double> scores = {0.3, 0.5, 0.4};
  std::vector<double> scaled;
  for (double s : scores) scaled.push_back(2.0 * s);
  CHECK(select_grid_point(scores) == select_grid_point(scaled));
  CHECK_THROWS_AS(select_grid_point({}), Error);
}

TEST_CASE("grid search runs three rounds and is deterministic") {
  Corpus corpus = eval_corpus(30);
  StopWordSet stops;
  EvalContext ctx;
  ctx.stops = &stops;
  ctx.vocab_min_doc_fraction = 0.0;

  AugmentationPlan plan;
  plan.technique = Technique::None;
  plan.seed = 1;

  GridSearchOutcome outcome =
      run_grid(corpus, CvssMetric::AccessVector, tiny_grid(), plan, ctx);
  REQUIRE(outcome.rounds.size() == 3);
  CHECK(outcome.selected_index < 2);
  for (size_t i = 0; i < 3; ++i) {
    const RoundResult& rr = outcome.rounds[i];
    CHECK(rr.round == static_cast<int>(i) + 1);
    CHECK(rr.task == CvssMetric::AccessVector);
    CHECK(rr.technique == Technique::None);
    CHECK(rr.hyperparams ==
          tiny_grid().point_summary(outcome.selected_index));
    CHECK(rr.validation_cm.total() == 6);
    CHECK(rr.test_cm.total() == 6);
    // The vocabulary separates the two description templates cleanly.
    CHECK(rr.test_mcc == doctest::Approx(1.0).epsilon(1e-9));
  }

  GridSearchOutcome again =
      run_grid(corpus, CvssMetric::AccessVector, tiny_grid(), plan, ctx);
  CHECK(again.selected_index == outcome.selected_index);
  for (size_t i = 0; i < 3; ++i) {
    CHECK(again.rounds[i].validation_mcc == outcome.rounds[i].validation_mcc);
    CHECK(again.rounds[i].test_mcc == outcome.rounds[i].test_mcc);
    CHECK(again.rounds[i].test_macro_f1 == outcome.rounds[i].test_macro_f1);
  }
}

TEST_CASE("rounds flag classes missing from their splits") {
  // From record 10 on, every record is class Network, so later folds never
  // see class Local.
  Corpus corpus = eval_corpus(30, 10);
  StopWordSet stops;
  EvalContext ctx;
  ctx.stops = &stops;
  ctx.vocab_min_doc_fraction = 0.0;
  AugmentationPlan plan;
  plan.technique = Technique::None;
  plan.seed = 1;

  GridSearchOutcome outcome =
      run_grid(corpus, CvssMetric::AccessVector, tiny_grid(), plan, ctx);
  auto has_flag = [](const RoundResult& rr, const std::string& needle) {
    for (const std::string& f : rr.flags)
      if (f.find(needle) != std::string::npos) return true;
    return false;
  };
  CHECK(has_flag(outcome.rounds[0], "test-missing-class:Local"));
  CHECK_FALSE(has_flag(outcome.rounds[0], "validation-missing-class:Local"));
  CHECK(has_flag(outcome.rounds[1], "validation-missing-class:Local"));
  CHECK(has_flag(outcome.rounds[1], "test-missing-class:Local"));
}

TEST_CASE("centroid similarity on a hand-built fixture") {
  std::vector<SparseVector> originals = {dense2(1, 0), dense2(1, 0),
                                         dense2(0, 1)};
  std::vector<uint32_t> orig_class = {0, 0, 1};
  std::vector<SparseVector> augmented = {dense2(1, 0), dense2(0.6, 0.8)};
  std::vector<uint32_t> aug_class = {0, 0};

  CentroidStats stats =
      centroid_similarity(augmented, aug_class, originals, orig_class);
  CHECK(stats.n_augmented[0] == 2);
  CHECK(stats.same_mean[0] == doctest::Approx(0.8).epsilon(kTol));
  CHECK(stats.other_mean[0] == doctest::Approx(0.4).epsilon(kTol));
  CHECK(stats.excluded[1]);
  CHECK(stats.excluded[2]);
  CHECK(stats.task_same == doctest::Approx(0.8).epsilon(kTol));
  CHECK(stats.task_other == doctest::Approx(0.4).epsilon(kTol));

  CHECK_THROWS_AS(
      centroid_similarity(augmented, {0}, originals, orig_class), Error);
  try {
    centroid_similarity(augmented, aug_class, {}, {});
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyData);
  }
}

TEST_CASE("centroid analysis aggregates the three rounds") {
  Corpus corpus = eval_corpus(40);
  StopWordSet stops;
  SynonymLexicon lexicon;
  EvalContext ctx;
  ctx.stops = &stops;
  ctx.lexicon = &lexicon;
  ctx.vocab_min_doc_fraction = 0.0;

  AugmentationPlan plan;
  plan.technique = Technique::Combination;
  plan.seed = 4;
  plan.pool_min_doc_fraction = 0.05;

  TaskCentroidReport report =
      centroid_analysis(corpus, CvssMetric::Confidentiality, plan, ctx);
  CHECK(report.task == CvssMetric::Confidentiality);
  CHECK(report.n_augmented > 0);
  CHECK(report.same >= -1.0);
  CHECK(report.same <= 1.0);
  CHECK(report.other >= -1.0);
  CHECK(report.other <= 1.0);
}

}  // TEST_SUITE
