#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "svaug/features.hpp"

namespace svaug {

// Splits with an impurity decrease at or below this count as no split.
inline constexpr double kMinSplitGain = 1e-12;

enum class FeatureSubset : uint8_t { Sqrt = 0, All };

struct ForestParams {
  uint32_t n_trees = 100;
  uint32_t max_depth = 7;
  uint32_t max_leaf_nodes = 100;
  FeatureSubset features_per_split = FeatureSubset::Sqrt;
  bool bootstrap = true;
  uint64_t seed = 0;

  std::string summary() const;
};

struct LogRegParams {
  double learning_rate = 0.5;
  uint32_t epochs = 40;
  uint32_t batch_size = 32;
  double l2 = 1e-4;
  uint64_t seed = 0;

  std::string summary() const;
};

struct TreeNode {
  int32_t left = -1;   // -1: leaf
  int32_t right = -1;
  uint32_t feature = 0;
  double threshold = 0.0;
  std::vector<double> probs;  // leaves only

  bool is_leaf() const { return left < 0; }
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  uint32_t depth = 0;
  uint32_t leaf_count = 0;

  const std::vector<double>& leaf_probs(const SparseVector& x) const;
};

enum class ModelKind : uint8_t { RandomForest = 0, LogisticRegression };
std::string_view model_kind_name(ModelKind k);
std::optional<ModelKind> model_kind_from_name(std::string_view name);

struct TrainedModel {
  ModelKind kind = ModelKind::RandomForest;
  uint32_t n_classes = 0;
  uint32_t dims = 0;
  std::vector<std::string> class_names;
  uint64_t vocab_hash = 0;
  std::string diagnostic;

  ForestParams forest_params;
  std::vector<DecisionTree> trees;

  LogRegParams logreg_params;
  std::vector<double> weights;  // (dims + 1) x n_classes, bias row last

  std::vector<double> predict_proba(const SparseVector& x) const;
  uint32_t predict(const SparseVector& x) const;  // argmax, lowest index wins

  std::string to_json() const;
  static TrainedModel from_json(std::string_view text);
  void save(const std::string& path) const;
  static TrainedModel load(const std::string& path);
};

// CART with Gini impurity; candidate thresholds are midpoints between
// consecutive distinct values present at the node (absent sparse entries
// count as zero); best-first growth up to max_leaf_nodes leaves.
TrainedModel train_forest(const std::vector<SparseVector>& X,
                          const std::vector<uint32_t>& y, uint32_t n_classes,
                          const ForestParams& params,
                          std::vector<std::string> class_names = {},
                          uint64_t vocab_hash = 0);

// Multinomial logistic regression, mini-batch gradient descent, weights
// initialized to zero. Training stops early if the epoch loss rises.
TrainedModel train_logreg(const std::vector<SparseVector>& X,
                          const std::vector<uint32_t>& y, uint32_t n_classes,
                          const LogRegParams& params,
                          std::vector<std::string> class_names = {},
                          uint64_t vocab_hash = 0);

// Full-batch objective and gradient on flat row-major weights
// ((dims+1) x n_classes); exposed for gradient checking.
double logreg_loss(const std::vector<double>& weights,
                   const std::vector<SparseVector>& X,
                   const std::vector<uint32_t>& y, uint32_t n_classes,
                   double l2);
std::vector<double> logreg_gradient(const std::vector<double>& weights,
                                    const std::vector<SparseVector>& X,
                                    const std::vector<uint32_t>& y,
                                    uint32_t n_classes, double l2);

}  // namespace svaug
