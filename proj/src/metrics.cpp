#include <cmath>

#include "svaug/error.hpp"
#include "svaug/eval.hpp"

namespace svaug {

uint64_t ConfusionMatrix::total() const {
  uint64_t t = 0;
  for (const auto& row : m)
    for (uint64_t v : row) t += v;
  return t;
}

ConfusionMatrix ConfusionMatrix::from_predictions(
    const std::vector<uint32_t>& truth, const std::vector<uint32_t>& pred) {
  if (truth.size() != pred.size())
    throw_input("confusion matrix: size mismatch");
  ConfusionMatrix cm;
  for (size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= kNumClasses || pred[i] >= kNumClasses)
      throw_input("confusion matrix: class index out of range");
    ++cm.m[truth[i]][pred[i]];
  }
  return cm;
}

double multiclass_mcc(const ConfusionMatrix& cm) {
  double s = static_cast<double>(cm.total());
  if (s == 0.0) return 0.0;
  double c = 0.0;
  std::array<double, kNumClasses> t{}, p{};
  for (size_t i = 0; i < kNumClasses; ++i) {
    c += static_cast<double>(cm.m[i][i]);
    for (size_t j = 0; j < kNumClasses; ++j) {
      t[i] += static_cast<double>(cm.m[i][j]);
      p[j] += static_cast<double>(cm.m[i][j]);
    }
  }
  double tp_sum = 0.0, tt = 0.0, pp = 0.0;
  for (size_t k = 0; k < kNumClasses; ++k) {
    tp_sum += p[k] * t[k];
    tt += t[k] * t[k];
    pp += p[k] * p[k];
  }
  double num = c * s - tp_sum;
  double den = std::sqrt((s * s - pp) * (s * s - tt));
  if (den == 0.0) return 0.0;
  return num / den;
}

double macro_f1(const ConfusionMatrix& cm) {
  double sum = 0.0;
  size_t present = 0;
  for (size_t k = 0; k < kNumClasses; ++k) {
    double tp = static_cast<double>(cm.m[k][k]);
    double truth_k = 0.0, pred_k = 0.0;
    for (size_t j = 0; j < kNumClasses; ++j) {
      truth_k += static_cast<double>(cm.m[k][j]);
      pred_k += static_cast<double>(cm.m[j][k]);
    }
    if (truth_k == 0.0 && pred_k == 0.0) continue;  // class absent entirely
    ++present;
    double denom = 2.0 * tp + (pred_k - tp) + (truth_k - tp);
    sum += denom == 0.0 ? 0.0 : 2.0 * tp / denom;
  }
  if (present == 0) return 0.0;
  return sum / static_cast<double>(present);
}

}  // namespace svaug
