#include <algorithm>
#include <cmath>

#include "svaug/error.hpp"
#include "svaug/forest.hpp"
#include "svaug/rng.hpp"
#include "train_common.hpp"

namespace svaug {

namespace {

// Class probabilities from flat row-major weights, bias row last.
void softmax_probs(const std::vector<double>& w, const SparseVector& x,
                   uint32_t dims, uint32_t n_classes, std::vector<double>& out) {
  out.assign(n_classes, 0.0);
  for (const auto& [idx, v] : x.entries)
    for (uint32_t c = 0; c < n_classes; ++c)
      out[c] += w[static_cast<size_t>(idx) * n_classes + c] * v;
  for (uint32_t c = 0; c < n_classes; ++c)
    out[c] += w[static_cast<size_t>(dims) * n_classes + c];
  double mx = out[0];
  for (double z : out) mx = std::max(mx, z);
  double sum = 0.0;
  for (auto& z : out) {
    z = std::exp(z - mx);
    sum += z;
  }
  for (auto& z : out) z /= sum;
}

}  // namespace

double logreg_loss(const std::vector<double>& weights,
                   const std::vector<SparseVector>& X,
                   const std::vector<uint32_t>& y, uint32_t n_classes,
                   double l2) {
  uint32_t dims = X[0].dims;
  std::vector<double> probs;
  double loss = 0.0;
  for (size_t i = 0; i < X.size(); ++i) {
    softmax_probs(weights, X[i], dims, n_classes, probs);
    loss -= std::log(std::max(probs[y[i]], 1e-300));
  }
  loss /= static_cast<double>(X.size());
  double reg = 0.0;
  for (size_t i = 0; i < static_cast<size_t>(dims) * n_classes; ++i)
    reg += weights[i] * weights[i];  // bias row is not regularized
  return loss + 0.5 * l2 * reg;
}

std::vector<double> logreg_gradient(const std::vector<double>& weights,
                                    const std::vector<SparseVector>& X,
                                    const std::vector<uint32_t>& y,
                                    uint32_t n_classes, double l2) {
  uint32_t dims = X[0].dims;
  std::vector<double> grad(weights.size(), 0.0);
  std::vector<double> probs;
  for (size_t i = 0; i < X.size(); ++i) {
    softmax_probs(weights, X[i], dims, n_classes, probs);
    probs[y[i]] -= 1.0;
    for (const auto& [idx, v] : X[i].entries)
      for (uint32_t c = 0; c < n_classes; ++c)
        grad[static_cast<size_t>(idx) * n_classes + c] += v * probs[c];
    for (uint32_t c = 0; c < n_classes; ++c)
      grad[static_cast<size_t>(dims) * n_classes + c] += probs[c];
  }
  double inv_n = 1.0 / static_cast<double>(X.size());
  for (auto& g : grad) g *= inv_n;
  for (size_t i = 0; i < static_cast<size_t>(dims) * n_classes; ++i)
    grad[i] += l2 * weights[i];
  return grad;
}

TrainedModel train_logreg(const std::vector<SparseVector>& X,
                          const std::vector<uint32_t>& y, uint32_t n_classes,
                          const LogRegParams& params,
                          std::vector<std::string> class_names,
                          uint64_t vocab_hash) {
  detail::validate_training_inputs(X, y, n_classes);
  if (params.batch_size < 1) throw_input("batch_size must be at least 1");
  if (params.learning_rate <= 0.0) throw_input("learning_rate must be > 0");
  if (params.epochs < 1) throw_input("epochs must be at least 1");

  TrainedModel model;
  model.kind = ModelKind::LogisticRegression;
  model.n_classes = n_classes;
  model.dims = X[0].dims;
  model.vocab_hash = vocab_hash;
  model.logreg_params = params;
  if (class_names.empty()) {
    for (uint32_t c = 0; c < n_classes; ++c)
      class_names.push_back("class" + std::to_string(c));
  }
  model.class_names = std::move(class_names);

  size_t n = X.size();
  size_t wsize = (static_cast<size_t>(model.dims) + 1) * n_classes;
  std::vector<double> w(wsize, 0.0);
  std::vector<double> best = w;
  double prev_loss = logreg_loss(w, X, y, n_classes, params.l2);

  Rng rng(mix_seed({params.seed, 0x109e9u}));
  std::vector<uint32_t> perm(n);
  for (size_t i = 0; i < n; ++i) perm[i] = static_cast<uint32_t>(i);
  std::vector<double> probs;
  std::vector<double> grad(wsize, 0.0);

  for (uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
    rng.shuffle(perm);
    for (size_t start = 0; start < n; start += params.batch_size) {
      size_t end = std::min(n, start + params.batch_size);
      std::fill(grad.begin(), grad.end(), 0.0);
      for (size_t b = start; b < end; ++b) {
        const SparseVector& x = X[perm[b]];
        softmax_probs(w, x, model.dims, n_classes, probs);
        probs[y[perm[b]]] -= 1.0;
        for (const auto& [idx, v] : x.entries)
          for (uint32_t c = 0; c < n_classes; ++c)
            grad[static_cast<size_t>(idx) * n_classes + c] += v * probs[c];
        for (uint32_t c = 0; c < n_classes; ++c)
          grad[static_cast<size_t>(model.dims) * n_classes + c] += probs[c];
      }
      double inv_b = 1.0 / static_cast<double>(end - start);
      size_t reg_limit = static_cast<size_t>(model.dims) * n_classes;
      for (size_t i = 0; i < wsize; ++i) {
        double g = grad[i] * inv_b;
        if (i < reg_limit) g += params.l2 * w[i];
        w[i] -= params.learning_rate * g;
      }
    }
    double loss = logreg_loss(w, X, y, n_classes, params.l2);
    if (loss > prev_loss + 1e-12) {
      model.diagnostic = "epoch loss rose at epoch " + std::to_string(epoch) +
                         "; kept the weights from the previous epoch";
      w = best;
      break;
    }
    prev_loss = loss;
    best = w;
  }
  model.weights = std::move(best);
  return model;
}

}  // namespace svaug
