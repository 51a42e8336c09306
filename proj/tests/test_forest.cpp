#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "svaug/error.hpp"
#include "svaug/forest.hpp"

using namespace svaug;

namespace {

SparseVector vec1(double v) {
  SparseVector x;
  x.dims = 1;
  if (v != 0.0) x.entries = {{0, v}};
  return x;
}

SparseVector onehot(uint32_t dims, uint32_t idx, double v) {
  SparseVector x;
  x.dims = dims;
  x.entries = {{idx, v}};
  return x;
}

ForestParams plain_tree(uint64_t seed = 0) {
  ForestParams p;
  p.n_trees = 1;
  p.bootstrap = false;
  p.features_per_split = FeatureSubset::All;
  p.seed = seed;
  return p;
}

double accuracy(const TrainedModel& model, const std::vector<SparseVector>& X,
                const std::vector<uint32_t>& y) {
  size_t hits = 0;
  for (size_t i = 0; i < X.size(); ++i)
    if (model.predict(X[i]) == y[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(X.size());
}

}  // namespace

TEST_SUITE("forest") {

TEST_CASE("a single tree finds the midpoint split") {
  std::vector<SparseVector> X = {vec1(0.0), vec1(0.2), vec1(0.8), vec1(1.0)};
  std::vector<uint32_t> y = {0, 0, 1, 1};
  TrainedModel model = train_forest(X, y, 2, plain_tree(9));

  REQUIRE(model.trees.size() == 1);
  const DecisionTree& tree = model.trees[0];
  REQUIRE(tree.nodes.size() == 3);
  CHECK_FALSE(tree.nodes[0].is_leaf());
  CHECK(tree.nodes[0].feature == 0);
  CHECK(tree.nodes[0].threshold == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(tree.depth == 1);
  CHECK(tree.leaf_count == 2);

  CHECK(model.predict(vec1(0.3)) == 0);
  CHECK(model.predict(vec1(0.7)) == 1);
  auto p0 = model.predict_proba(vec1(0.1));
  CHECK(p0[0] == doctest::Approx(1.0));
  CHECK(p0[1] == doctest::Approx(0.0));
}

TEST_CASE("the best gini split wins over earlier candidates") {
  // Labels 0,1,0,0,1,1 along one axis: the only perfect first cut that
  // isolates a pure side is after the fourth value.
  std::vector<SparseVector> X;
  for (int i = 1; i <= 6; ++i) X.push_back(vec1(i));
  std::vector<uint32_t> y = {0, 1, 0, 0, 1, 1};
  TrainedModel model = train_forest(X, y, 2, plain_tree());
  CHECK(model.trees[0].nodes[0].threshold ==
        doctest::Approx(4.5).epsilon(1e-15));
  CHECK(accuracy(model, X, y) == 1.0);
}

TEST_CASE("absent sparse entries are treated as zeros") {
  std::vector<SparseVector> X = {vec1(0.0), vec1(0.0), vec1(0.5), vec1(0.9)};
  std::vector<uint32_t> y = {0, 0, 1, 1};
  TrainedModel model = train_forest(X, y, 2, plain_tree());
  CHECK(model.trees[0].nodes[0].threshold ==
        doctest::Approx(0.25).epsilon(1e-15));
  CHECK(model.predict(vec1(0.0)) == 0);
  CHECK(model.predict(vec1(0.6)) == 1);
}

TEST_CASE("the forest separates three orthogonal clusters") {
  std::vector<SparseVector> X;
  std::vector<uint32_t> y;
  for (uint32_t c = 0; c < 3; ++c) {
    for (int i = 0; i < 8; ++i) {
      X.push_back(onehot(3, c, 0.8 + 0.03 * i));
      y.push_back(c);
    }
  }
  ForestParams params;
  params.n_trees = 15;
  params.max_depth = 5;
  params.max_leaf_nodes = 16;
  params.features_per_split = FeatureSubset::All;
  params.seed = 5;
  TrainedModel model =
      train_forest(X, y, 3, params, {"low", "mid", "high"});
  CHECK(accuracy(model, X, y) == 1.0);
  CHECK(model.class_names == std::vector<std::string>{"low", "mid", "high"});
  for (const auto& x : X) {
    auto probs = model.predict_proba(x);
    double sum = 0.0;
    for (double p : probs) sum += p;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("forest serialization round-trips byte for byte") {
  std::vector<SparseVector> X;
  std::vector<uint32_t> y;
  for (int i = 0; i < 20; ++i) {
    X.push_back(vec1(0.05 * i));
    y.push_back(static_cast<uint32_t>(i >= 10));
  }
  ForestParams params;
  params.n_trees = 4;
  params.max_depth = 4;
  params.max_leaf_nodes = 8;
  params.seed = 11;
  TrainedModel model = train_forest(X, y, 2, params, {"a", "b"}, 0xdeadbeefULL);

  std::string text = model.to_json();
  TrainedModel back = TrainedModel::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.vocab_hash == 0xdeadbeefULL);
  CHECK(back.class_names == model.class_names);
  CHECK(back.trees.size() == model.trees.size());
  for (const auto& x : X) CHECK(back.predict(x) == model.predict(x));

  std::string path = "/tmp/svaug_forest_roundtrip.json";
  model.save(path);
  TrainedModel loaded = TrainedModel::load(path);
  CHECK(loaded.to_json() == text);
  std::remove(path.c_str());

  CHECK_THROWS_AS(TrainedModel::from_json("not json"), Error);
  CHECK_THROWS_AS(TrainedModel::from_json("{\"format\":\"other\"}"), Error);
}

TEST_CASE("training is deterministic in the seed") {
  std::vector<SparseVector> X;
  std::vector<uint32_t> y;
  for (int i = 0; i < 20; ++i) {
    X.push_back(vec1(0.05 * i));
    y.push_back(static_cast<uint32_t>(i % 2));
  }
  ForestParams params;
  params.n_trees = 3;
  params.max_depth = 3;
  params.max_leaf_nodes = 8;
  params.seed = 21;
  std::string first = train_forest(X, y, 2, params).to_json();
  std::string second = train_forest(X, y, 2, params).to_json();
  CHECK(first == second);

  params.seed = 22;
  CHECK(train_forest(X, y, 2, params).to_json() != first);
}

TEST_CASE("prediction ties go to the lowest class index") {
  TrainedModel model;
  model.kind = ModelKind::RandomForest;
  model.n_classes = 3;
  model.dims = 1;
  TreeNode leaf;
  leaf.probs = {0.4, 0.4, 0.2};
  DecisionTree tree;
  tree.nodes = {leaf};
  tree.leaf_count = 1;
  model.trees = {tree};
  CHECK(model.predict(vec1(0.5)) == 0);

  model.trees[0].nodes[0].probs = {0.2, 0.4, 0.4};
  CHECK(model.predict(vec1(0.5)) == 1);
}

TEST_CASE("duplicating every sample changes nothing without bootstrap") {
  std::vector<SparseVector> X;
  std::vector<uint32_t> y;
  for (int i = 0; i < 8; ++i) {
    X.push_back(vec1(0.1 * i + (i % 3) * 0.01));
    y.push_back(static_cast<uint32_t>(i % 2));
  }
  std::vector<SparseVector> doubled = X;
  doubled.insert(doubled.end(), X.begin(), X.end());
  std::vector<uint32_t> ydoubled = y;
  ydoubled.insert(ydoubled.end(), y.begin(), y.end());

  ForestParams params = plain_tree(7);
  params.max_depth = 4;
  params.max_leaf_nodes = 10;
  std::string a = train_forest(X, y, 2, params).to_json();
  std::string b = train_forest(doubled, ydoubled, 2, params).to_json();
  CHECK(a == b);
}

TEST_CASE("single-class labels produce a constant model with a note") {
  std::vector<SparseVector> X = {vec1(0.1), vec1(0.4), vec1(0.9)};
  std::vector<uint32_t> y = {1, 1, 1};
  TrainedModel model = train_forest(X, y, 3, plain_tree());
  CHECK_FALSE(model.diagnostic.empty());
  CHECK(model.predict(vec1(0.2)) == 1);
  CHECK(model.predict(vec1(0.8)) == 1);
}

TEST_CASE("training input validation") {
  std::vector<SparseVector> one = {vec1(0.5)};
  CHECK_THROWS_AS(train_forest(one, {0}, 2, plain_tree()), Error);

  std::vector<SparseVector> X = {vec1(0.1), vec1(0.9)};
  CHECK_THROWS_AS(train_forest(X, {0}, 2, plain_tree()), Error);
  CHECK_THROWS_AS(train_forest(X, {0, 1}, 1, plain_tree()), Error);
  CHECK_THROWS_AS(train_forest(X, {0, 5}, 2, plain_tree()), Error);

  std::vector<SparseVector> ragged = {vec1(0.1), onehot(2, 1, 0.5)};
  CHECK_THROWS_AS(train_forest(ragged, {0, 1}, 2, plain_tree()), Error);

  ForestParams bad = plain_tree();
  bad.n_trees = 0;
  CHECK_THROWS_AS(train_forest(X, {0, 1}, 2, bad), Error);
  bad = plain_tree();
  bad.max_depth = 0;
  CHECK_THROWS_AS(train_forest(X, {0, 1}, 2, bad), Error);
  bad = plain_tree();
  bad.max_leaf_nodes = 1;
  CHECK_THROWS_AS(train_forest(X, {0, 1}, 2, bad), Error);

  CHECK_THROWS_AS(train_forest(X, {0, 1}, 2, plain_tree(), {"only-one"}),
                  Error);

  TrainedModel model = train_forest(X, {0, 1}, 2, plain_tree());
  CHECK_THROWS_AS(model.predict(onehot(2, 0, 1.0)), Error);
}

TEST_CASE("logreg gradient agrees with central differences") {
  std::vector<SparseVector> X = {
      onehot(3, 0, 1.0), onehot(3, 1, 0.8), onehot(3, 2, 1.2),
      onehot(3, 0, 0.6), onehot(3, 1, 1.1),
  };
  X[2].entries.insert(X[2].entries.begin(), {0, 0.3});
  std::vector<uint32_t> y = {0, 1, 2, 0, 1};
  uint32_t n_classes = 3;
  double l2 = 0.1;

  std::vector<double> w((3 + 1) * n_classes);
  for (size_t i = 0; i < w.size(); ++i)
    w[i] = 0.3 * std::sin(static_cast<double>(i) + 1.0);

  std::vector<double> grad = logreg_gradient(w, X, y, n_classes, l2);
  REQUIRE(grad.size() == w.size());
  double h = 1e-6;
  for (size_t i = 0; i < w.size(); ++i) {
    std::vector<double> up = w, down = w;
    up[i] += h;
    down[i] -= h;
    double numeric = (logreg_loss(up, X, y, n_classes, l2) -
                      logreg_loss(down, X, y, n_classes, l2)) /
                     (2.0 * h);
    CHECK(grad[i] == doctest::Approx(numeric).epsilon(1e-7));
  }
}

TEST_CASE("logreg learns a separable problem and round-trips") {
  std::vector<SparseVector> X;
  std::vector<uint32_t> y;
  for (int i = 0; i < 6; ++i) {
    X.push_back(onehot(2, 0, 0.9 + 0.02 * i));
    y.push_back(0);
    X.push_back(onehot(2, 1, 0.9 + 0.02 * i));
    y.push_back(1);
  }
  LogRegParams params;
  params.epochs = 60;
  params.batch_size = 4;
  params.seed = 3;
  TrainedModel model = train_logreg(X, y, 2, params, {"neg", "pos"});
  CHECK(accuracy(model, X, y) == 1.0);

  auto probs = model.predict_proba(X[0]);
  CHECK(probs[0] + probs[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(probs[0] > probs[1]);

  std::string text = model.to_json();
  TrainedModel back = TrainedModel::from_json(text);
  CHECK(back.to_json() == text);
  CHECK(back.weights == model.weights);
  CHECK(back.kind == ModelKind::LogisticRegression);

  TrainedModel again = train_logreg(X, y, 2, params, {"neg", "pos"});
  CHECK(again.weights == model.weights);
}

TEST_CASE("logreg parameter validation") {
  std::vector<SparseVector> X = {onehot(2, 0, 1.0), onehot(2, 1, 1.0)};
  std::vector<uint32_t> y = {0, 1};
  LogRegParams bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(train_logreg(X, y, 2, bad), Error);
  bad = LogRegParams{};
  bad.learning_rate = 0.0;
  CHECK_THROWS_AS(train_logreg(X, y, 2, bad), Error);
  bad = LogRegParams{};
  bad.epochs = 0;
  CHECK_THROWS_AS(train_logreg(X, y, 2, bad), Error);
}

TEST_CASE("parameter summaries and model kind names") {
  CHECK(ForestParams{}.summary() == "trees=100,depth=7,leaves=100");
  CHECK(LogRegParams{}.summary() == "lr=0.5,epochs=40,batch=32,l2=0.0001");
  CHECK(model_kind_name(ModelKind::RandomForest) == "random_forest");
  CHECK(model_kind_name(ModelKind::LogisticRegression) ==
        "logistic_regression");
  CHECK(model_kind_from_name("random_forest") == ModelKind::RandomForest);
  CHECK(model_kind_from_name("logistic_regression") ==
        ModelKind::LogisticRegression);
  CHECK_FALSE(model_kind_from_name("svm").has_value());
}

}  // TEST_SUITE
