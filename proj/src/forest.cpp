#include "svaug/forest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <queue>

#include <json.hpp>

#include "svaug/corpus.hpp"
#include "svaug/error.hpp"
#include "svaug/rng.hpp"

namespace svaug {

std::string ForestParams::summary() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "trees=%u,depth=%u,leaves=%u", n_trees,
                max_depth, max_leaf_nodes);
  return buf;
}

std::string LogRegParams::summary() const {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "lr=%g,epochs=%u,batch=%u,l2=%g",
                learning_rate, epochs, batch_size, l2);
  return buf;
}

std::string_view model_kind_name(ModelKind k) {
  return k == ModelKind::RandomForest ? "random_forest"
                                      : "logistic_regression";
}

std::optional<ModelKind> model_kind_from_name(std::string_view name) {
  std::string n(name);
  std::transform(n.begin(), n.end(), n.begin(), [](unsigned char c) {
    return c == '-' ? '_' : std::tolower(c);
  });
  if (n == "random_forest" || n == "rf") return ModelKind::RandomForest;
  if (n == "logistic_regression" || n == "logreg")
    return ModelKind::LogisticRegression;
  return std::nullopt;
}

namespace {

double feature_value(const SparseVector& x, uint32_t feature) {
  auto it = std::lower_bound(
      x.entries.begin(), x.entries.end(), feature,
      [](const std::pair<uint32_t, double>& e, uint32_t f) {
        return e.first < f;
      });
  if (it != x.entries.end() && it->first == feature) return it->second;
  return 0.0;
}

struct Csc {
  uint32_t rows = 0, cols = 0;
  std::vector<uint32_t> col_ptr;
  std::vector<uint32_t> row_idx;
  std::vector<double> val;

  static Csc build(const std::vector<SparseVector>& X, uint32_t dims) {
    Csc csc;
    csc.rows = static_cast<uint32_t>(X.size());
    csc.cols = dims;
    csc.col_ptr.assign(dims + 1, 0);
    for (const auto& row : X)
      for (const auto& [idx, w] : row.entries) ++csc.col_ptr[idx + 1];
    for (uint32_t c = 0; c < dims; ++c) csc.col_ptr[c + 1] += csc.col_ptr[c];
    csc.row_idx.resize(csc.col_ptr[dims]);
    csc.val.resize(csc.col_ptr[dims]);
    std::vector<uint32_t> cursor(csc.col_ptr.begin(), csc.col_ptr.end() - 1);
    for (uint32_t r = 0; r < X.size(); ++r) {
      for (const auto& [idx, w] : X[r].entries) {
        csc.row_idx[cursor[idx]] = r;
        csc.val[cursor[idx]] = w;
        ++cursor[idx];
      }
    }
    return csc;
  }
};

double gini(const std::vector<double>& counts, double total) {
  if (total <= 0.0) return 0.0;
  double s = 0.0;
  for (double c : counts) {
    double f = c / total;
    s += f * f;
  }
  return 1.0 - s;
}

struct SplitChoice {
  bool valid = false;
  uint32_t feature = 0;
  double threshold = 0.0;
  double gain = 0.0;
};

struct GrowNode {
  std::vector<uint32_t> rows;     // distinct sample rows at this node
  std::vector<uint32_t> weights;  // bootstrap multiplicity per row
  std::vector<double> counts;     // weighted class counts
  double total = 0.0;
  uint32_t depth = 0;
  int32_t tree_node = -1;  // index in the finished tree
  SplitChoice split;
};

class TreeBuilder {
 public:
  TreeBuilder(const Csc& csc, const std::vector<uint32_t>& y,
              uint32_t n_classes, const ForestParams& params, Rng& rng)
      : csc_(csc), y_(y), n_classes_(n_classes), params_(params), rng_(rng) {
    stamp_epoch_.assign(csc.rows, 0);
    stamp_slot_.assign(csc.rows, 0);
    feature_order_.resize(csc.cols);
    for (uint32_t f = 0; f < csc.cols; ++f) feature_order_[f] = f;
    target_features_ =
        params.features_per_split == FeatureSubset::All
            ? csc.cols
            : std::max<uint32_t>(
                  1, static_cast<uint32_t>(
                         std::ceil(std::sqrt(static_cast<double>(csc.cols)))));
  }

  DecisionTree build(std::vector<uint32_t> rows, std::vector<uint32_t> weights);

 private:
  void compute_split(GrowNode& node);
  void stamp(const GrowNode& node);

  const Csc& csc_;
  const std::vector<uint32_t>& y_;
  uint32_t n_classes_;
  const ForestParams& params_;
  Rng& rng_;
  uint32_t target_features_ = 0;

  uint32_t epoch_ = 0;
  std::vector<uint32_t> stamp_epoch_;
  std::vector<uint32_t> stamp_slot_;
  std::vector<uint32_t> feature_order_;
  std::vector<std::pair<double, uint32_t>> gather_;  // (value, slot)
};

void TreeBuilder::stamp(const GrowNode& node) {
  ++epoch_;
  for (uint32_t s = 0; s < node.rows.size(); ++s) {
    stamp_epoch_[node.rows[s]] = epoch_;
    stamp_slot_[node.rows[s]] = s;
  }
}

void TreeBuilder::compute_split(GrowNode& node) {
  node.split = SplitChoice{};
  if (node.depth >= params_.max_depth) return;
  if (node.total < 2.0) return;
  double node_gini = gini(node.counts, node.total);
  if (node_gini <= 0.0) return;  // pure

  stamp(node);

  std::vector<double> nz_counts(n_classes_);
  std::vector<double> left(n_classes_), group_counts(n_classes_);
  uint32_t examined = 0;
  uint32_t draws = 0;
  bool randomized = params_.features_per_split != FeatureSubset::All;

  while (draws < csc_.cols && examined < target_features_) {
    uint32_t f;
    if (randomized) {
      uint32_t j = draws + static_cast<uint32_t>(rng_.bounded(csc_.cols - draws));
      std::swap(feature_order_[draws], feature_order_[j]);
      f = feature_order_[draws];
    } else {
      f = draws;
    }
    ++draws;

    gather_.clear();
    std::fill(nz_counts.begin(), nz_counts.end(), 0.0);
    double nz_weight = 0.0;
    for (uint32_t i = csc_.col_ptr[f]; i < csc_.col_ptr[f + 1]; ++i) {
      uint32_t r = csc_.row_idx[i];
      if (stamp_epoch_[r] != epoch_) continue;
      uint32_t slot = stamp_slot_[r];
      gather_.emplace_back(csc_.val[i], slot);
      double w = static_cast<double>(node.weights[slot]);
      nz_counts[y_[node.rows[slot]]] += w;
      nz_weight += w;
    }
    double zero_weight = node.total - nz_weight;
    if (gather_.empty()) continue;  // constant zero at this node
    std::sort(gather_.begin(), gather_.end());
    if (zero_weight <= 0.0 &&
        gather_.front().first == gather_.back().first)
      continue;  // constant nonzero value
    ++examined;

    // Sweep distinct values in ascending order, the implicit zero group
    // included at its sorted position.
    std::fill(left.begin(), left.end(), 0.0);
    double left_weight = 0.0;
    double prev_value = 0.0;
    bool have_prev = false;
    size_t gi = 0;
    bool zero_pending = zero_weight > 0.0;

    auto consider = [&](double value) {
      if (have_prev) {
        double thr = (prev_value + value) / 2.0;
        double right_weight = node.total - left_weight;
        if (left_weight > 0.0 && right_weight > 0.0) {
          double g = node_gini;
          double gl = 0.0, gr = 0.0;
          for (uint32_t c = 0; c < n_classes_; ++c) {
            double lc = left[c];
            double rc = node.counts[c] - lc;
            gl += (lc / left_weight) * (lc / left_weight);
            gr += (rc / right_weight) * (rc / right_weight);
          }
          g -= (left_weight / node.total) * (1.0 - gl) +
               (right_weight / node.total) * (1.0 - gr);
          if (g > kMinSplitGain &&
              (!node.split.valid || g > node.split.gain ||
               (g == node.split.gain && f < node.split.feature))) {
            node.split.valid = true;
            node.split.feature = f;
            node.split.threshold = thr;
            node.split.gain = g;
          }
        }
      }
      prev_value = value;
      have_prev = true;
    };

    while (gi < gather_.size() || zero_pending) {
      double value;
      bool take_zero;
      if (!zero_pending) {
        take_zero = false;
        value = gather_[gi].first;
      } else if (gi >= gather_.size()) {
        take_zero = true;
        value = 0.0;
      } else if (gather_[gi].first < 0.0) {
        take_zero = false;
        value = gather_[gi].first;
      } else {
        take_zero = true;
        value = 0.0;
      }

      consider(value);

      if (take_zero) {
        for (uint32_t c = 0; c < n_classes_; ++c)
          left[c] += node.counts[c] - nz_counts[c];
        left_weight += zero_weight;
        zero_pending = false;
      } else {
        std::fill(group_counts.begin(), group_counts.end(), 0.0);
        double group_weight = 0.0;
        double v = gather_[gi].first;
        while (gi < gather_.size() && gather_[gi].first == v) {
          uint32_t slot = gather_[gi].second;
          double w = static_cast<double>(node.weights[slot]);
          group_counts[y_[node.rows[slot]]] += w;
          group_weight += w;
          ++gi;
        }
        for (uint32_t c = 0; c < n_classes_; ++c) left[c] += group_counts[c];
        left_weight += group_weight;
      }
    }
  }
}

DecisionTree TreeBuilder::build(std::vector<uint32_t> rows,
                                std::vector<uint32_t> weights) {
  std::vector<GrowNode> grown;
  grown.reserve(2 * params_.max_leaf_nodes);

  GrowNode root;
  root.rows = std::move(rows);
  root.weights = std::move(weights);
  root.counts.assign(n_classes_, 0.0);
  for (uint32_t s = 0; s < root.rows.size(); ++s) {
    root.counts[y_[root.rows[s]]] += static_cast<double>(root.weights[s]);
    root.total += static_cast<double>(root.weights[s]);
  }
  root.depth = 0;
  root.tree_node = 0;
  compute_split(root);
  grown.push_back(std::move(root));

  DecisionTree tree;
  tree.nodes.emplace_back();

  struct QueueItem {
    double gain;
    uint64_t seq;
    size_t grow_index;
  };
  auto worse = [](const QueueItem& a, const QueueItem& b) {
    if (a.gain != b.gain) return a.gain < b.gain;
    return a.seq > b.seq;  // earlier-created node wins ties
  };
  std::priority_queue<QueueItem, std::vector<QueueItem>, decltype(worse)> pq(
      worse);
  uint64_t seq = 0;
  if (grown[0].split.valid) pq.push({grown[0].split.gain, seq++, 0});

  uint32_t leaves = 1;
  uint32_t max_depth_seen = 0;

  while (!pq.empty() && leaves < params_.max_leaf_nodes) {
    auto item = pq.top();
    pq.pop();
    size_t gi = item.grow_index;
    uint32_t f = grown[gi].split.feature;
    double thr = grown[gi].split.threshold;

    // Per-slot feature values; absent entries are zero.
    stamp(grown[gi]);
    std::vector<double> slot_value(grown[gi].rows.size(), 0.0);
    for (uint32_t i = csc_.col_ptr[f]; i < csc_.col_ptr[f + 1]; ++i) {
      uint32_t r = csc_.row_idx[i];
      if (stamp_epoch_[r] == epoch_) slot_value[stamp_slot_[r]] = csc_.val[i];
    }

    GrowNode left, right;
    left.counts.assign(n_classes_, 0.0);
    right.counts.assign(n_classes_, 0.0);
    left.depth = right.depth = grown[gi].depth + 1;
    for (uint32_t s = 0; s < grown[gi].rows.size(); ++s) {
      GrowNode& dst = slot_value[s] <= thr ? left : right;
      dst.rows.push_back(grown[gi].rows[s]);
      dst.weights.push_back(grown[gi].weights[s]);
      dst.counts[y_[grown[gi].rows[s]]] +=
          static_cast<double>(grown[gi].weights[s]);
      dst.total += static_cast<double>(grown[gi].weights[s]);
    }
    if (left.rows.empty() || right.rows.empty())
      throw_internal("tree split produced an empty child");

    max_depth_seen = std::max(max_depth_seen, left.depth);

    int32_t parent_node = grown[gi].tree_node;
    grown[gi].rows.clear();
    grown[gi].rows.shrink_to_fit();
    grown[gi].weights.clear();
    grown[gi].weights.shrink_to_fit();

    compute_split(left);
    compute_split(right);

    left.tree_node = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    right.tree_node = static_cast<int32_t>(tree.nodes.size());
    tree.nodes.emplace_back();
    tree.nodes[static_cast<size_t>(parent_node)].left = left.tree_node;
    tree.nodes[static_cast<size_t>(parent_node)].right = right.tree_node;
    tree.nodes[static_cast<size_t>(parent_node)].feature = f;
    tree.nodes[static_cast<size_t>(parent_node)].threshold = thr;

    size_t left_index = grown.size();
    if (left.split.valid) pq.push({left.split.gain, seq++, left_index});
    grown.push_back(std::move(left));
    size_t right_index = grown.size();
    if (right.split.valid) pq.push({right.split.gain, seq++, right_index});
    grown.push_back(std::move(right));

    ++leaves;
  }

  // Fill leaf probabilities for every childless node.
  uint32_t leaf_count = 0;
  for (const auto& g : grown) {
    TreeNode& n = tree.nodes[static_cast<size_t>(g.tree_node)];
    if (n.left >= 0) continue;
    n.probs.resize(n_classes_);
    for (uint32_t c = 0; c < n_classes_; ++c)
      n.probs[c] = g.total > 0.0 ? g.counts[c] / g.total : 0.0;
    ++leaf_count;
  }
  tree.depth = max_depth_seen;
  tree.leaf_count = leaf_count;
  return tree;
}

}  // namespace

namespace detail {

void validate_training_inputs(const std::vector<SparseVector>& X,
                              const std::vector<uint32_t>& y,
                              uint32_t n_classes) {
  if (X.size() < 2) throw_input("training needs at least two samples");
  if (X.size() != y.size())
    throw_input("training: feature/label count mismatch");
  if (n_classes < 2) throw_input("training needs at least two classes");
  uint32_t dims = X[0].dims;
  for (const auto& row : X)
    if (row.dims != dims)
      throw_input("training rows disagree on dimensionality");
  for (uint32_t label : y)
    if (label >= n_classes) throw_input("label out of range");
}

}  // namespace detail

const std::vector<double>& DecisionTree::leaf_probs(
    const SparseVector& x) const {
  size_t i = 0;
  while (!nodes[i].is_leaf()) {
    double v = feature_value(x, nodes[i].feature);
    i = static_cast<size_t>(v <= nodes[i].threshold ? nodes[i].left
                                                    : nodes[i].right);
  }
  return nodes[i].probs;
}

TrainedModel train_forest(const std::vector<SparseVector>& X,
                          const std::vector<uint32_t>& y, uint32_t n_classes,
                          const ForestParams& params,
                          std::vector<std::string> class_names,
                          uint64_t vocab_hash) {
  detail::validate_training_inputs(X, y, n_classes);
  if (params.n_trees < 1) throw_input("n_trees must be at least 1");
  if (params.max_depth < 1) throw_input("max_depth must be at least 1");
  if (params.max_leaf_nodes < 2) throw_input("max_leaf_nodes must be >= 2");
  if (!class_names.empty() && class_names.size() != n_classes)
    throw_input("class name count does not match n_classes");

  TrainedModel model;
  model.kind = ModelKind::RandomForest;
  model.n_classes = n_classes;
  model.dims = X[0].dims;
  model.vocab_hash = vocab_hash;
  model.forest_params = params;
  if (class_names.empty()) {
    for (uint32_t c = 0; c < n_classes; ++c)
      class_names.push_back("class" + std::to_string(c));
  }
  model.class_names = std::move(class_names);

  bool single_class = true;
  for (size_t i = 1; i < y.size(); ++i)
    if (y[i] != y[0]) {
      single_class = false;
      break;
    }
  if (single_class)
    model.diagnostic = "training labels contain a single class; the model "
                       "is a constant predictor";

  Csc csc = Csc::build(X, model.dims);
  uint32_t n = static_cast<uint32_t>(X.size());
  model.trees.reserve(params.n_trees);
  for (uint32_t t = 0; t < params.n_trees; ++t) {
    Rng rng(mix_seed({params.seed, 0x7265e5u, t}));
    std::vector<uint32_t> rows, weights;
    if (params.bootstrap) {
      std::vector<uint32_t> count(n, 0);
      for (uint32_t i = 0; i < n; ++i)
        ++count[static_cast<uint32_t>(rng.bounded(n))];
      for (uint32_t r = 0; r < n; ++r)
        if (count[r] > 0) {
          rows.push_back(r);
          weights.push_back(count[r]);
        }
    } else {
      rows.resize(n);
      for (uint32_t r = 0; r < n; ++r) rows[r] = r;
      weights.assign(n, 1);
    }
    TreeBuilder builder(csc, y, n_classes, params, rng);
    model.trees.push_back(builder.build(std::move(rows), std::move(weights)));
  }
  return model;
}

std::vector<double> TrainedModel::predict_proba(const SparseVector& x) const {
  if (x.dims != dims)
    throw_input("predict: expected " + std::to_string(dims) +
                " dimensions, got " + std::to_string(x.dims));
  std::vector<double> probs(n_classes, 0.0);
  if (kind == ModelKind::RandomForest) {
    for (const auto& tree : trees) {
      const auto& leaf = tree.leaf_probs(x);
      for (uint32_t c = 0; c < n_classes; ++c) probs[c] += leaf[c];
    }
    double nt = static_cast<double>(trees.size());
    for (auto& p : probs) p /= nt;
    return probs;
  }
  // Multinomial logistic regression.
  std::vector<double> logits(n_classes, 0.0);
  for (const auto& [idx, v] : x.entries)
    for (uint32_t c = 0; c < n_classes; ++c)
      logits[c] += weights[static_cast<size_t>(idx) * n_classes + c] * v;
  for (uint32_t c = 0; c < n_classes; ++c)
    logits[c] += weights[static_cast<size_t>(dims) * n_classes + c];
  double mx = logits[0];
  for (double z : logits) mx = std::max(mx, z);
  double sum = 0.0;
  for (uint32_t c = 0; c < n_classes; ++c) {
    probs[c] = std::exp(logits[c] - mx);
    sum += probs[c];
  }
  for (auto& p : probs) p /= sum;
  return probs;
}

uint32_t TrainedModel::predict(const SparseVector& x) const {
  auto probs = predict_proba(x);
  uint32_t best = 0;
  for (uint32_t c = 1; c < n_classes; ++c)
    if (probs[c] > probs[best]) best = c;
  return best;
}

std::string TrainedModel::to_json() const {
  nlohmann::json j;
  j["format"] = "svaug-model";
  j["version"] = 1;
  j["kind"] = std::string(model_kind_name(kind));
  j["n_classes"] = n_classes;
  j["dims"] = dims;
  j["class_names"] = class_names;
  char hash_buf[32];
  std::snprintf(hash_buf, sizeof(hash_buf), "%016llx",
                static_cast<unsigned long long>(vocab_hash));
  j["vocab_hash"] = hash_buf;
  j["diagnostic"] = diagnostic;
  if (kind == ModelKind::RandomForest) {
    j["params"] = {{"n_trees", forest_params.n_trees},
                   {"max_depth", forest_params.max_depth},
                   {"max_leaf_nodes", forest_params.max_leaf_nodes},
                   {"features_per_split",
                    forest_params.features_per_split == FeatureSubset::All
                        ? "all"
                        : "sqrt"},
                   {"bootstrap", forest_params.bootstrap},
                   {"seed", forest_params.seed}};
    nlohmann::json trees_json = nlohmann::json::array();
    for (const auto& tree : trees) {
      nlohmann::json tj;
      tj["depth"] = tree.depth;
      tj["leaves"] = tree.leaf_count;
      nlohmann::json nodes = nlohmann::json::array();
      for (const auto& n : tree.nodes) {
        if (n.is_leaf())
          nodes.push_back({{"p", n.probs}});
        else
          nodes.push_back({{"f", n.feature},
                           {"t", n.threshold},
                           {"l", n.left},
                           {"r", n.right}});
      }
      tj["nodes"] = std::move(nodes);
      trees_json.push_back(std::move(tj));
    }
    j["trees"] = std::move(trees_json);
  } else {
    j["params"] = {{"learning_rate", logreg_params.learning_rate},
                   {"epochs", logreg_params.epochs},
                   {"batch_size", logreg_params.batch_size},
                   {"l2", logreg_params.l2},
                   {"seed", logreg_params.seed}};
    j["weights"] = weights;
  }
  return j.dump();
}

TrainedModel TrainedModel::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw_input(std::string("model file is not valid JSON: ") + e.what());
  }
  if (j.value("format", "") != "svaug-model")
    throw_input("not a model file");
  if (j.value("version", 0) != 1)
    throw_input("unsupported model version");

  TrainedModel model;
  auto kind = model_kind_from_name(j.value("kind", ""));
  if (!kind) throw_input("unknown model kind");
  model.kind = *kind;
  model.n_classes = j.at("n_classes").get<uint32_t>();
  model.dims = j.at("dims").get<uint32_t>();
  model.class_names = j.at("class_names").get<std::vector<std::string>>();
  model.diagnostic = j.value("diagnostic", "");
  std::string hash_str = j.value("vocab_hash", "0");
  model.vocab_hash = std::strtoull(hash_str.c_str(), nullptr, 16);

  const auto& p = j.at("params");
  if (model.kind == ModelKind::RandomForest) {
    model.forest_params.n_trees = p.at("n_trees").get<uint32_t>();
    model.forest_params.max_depth = p.at("max_depth").get<uint32_t>();
    model.forest_params.max_leaf_nodes = p.at("max_leaf_nodes").get<uint32_t>();
    model.forest_params.features_per_split =
        p.value("features_per_split", "sqrt") == std::string("all")
            ? FeatureSubset::All
            : FeatureSubset::Sqrt;
    model.forest_params.bootstrap = p.value("bootstrap", true);
    model.forest_params.seed = p.value("seed", 0ULL);
    for (const auto& tj : j.at("trees")) {
      DecisionTree tree;
      tree.depth = tj.value("depth", 0u);
      tree.leaf_count = tj.value("leaves", 0u);
      for (const auto& nj : tj.at("nodes")) {
        TreeNode n;
        if (nj.contains("p")) {
          n.probs = nj.at("p").get<std::vector<double>>();
        } else {
          n.feature = nj.at("f").get<uint32_t>();
          n.threshold = nj.at("t").get<double>();
          n.left = nj.at("l").get<int32_t>();
          n.right = nj.at("r").get<int32_t>();
        }
        tree.nodes.push_back(std::move(n));
      }
      model.trees.push_back(std::move(tree));
    }
  } else {
    model.logreg_params.learning_rate = p.at("learning_rate").get<double>();
    model.logreg_params.epochs = p.at("epochs").get<uint32_t>();
    model.logreg_params.batch_size = p.at("batch_size").get<uint32_t>();
    model.logreg_params.l2 = p.at("l2").get<double>();
    model.logreg_params.seed = p.value("seed", 0ULL);
    model.weights = j.at("weights").get<std::vector<double>>();
  }
  return model;
}

void TrainedModel::save(const std::string& path) const {
  write_file(path, to_json());
}

TrainedModel TrainedModel::load(const std::string& path) {
  return from_json(read_file(path));
}

}  // namespace svaug
