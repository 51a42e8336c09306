#include <algorithm>
#include <cmath>

#include "svaug/error.hpp"
#include "svaug/eval.hpp"

namespace svaug {

std::string_view effect_magnitude(double r) {
  if (r <= 0.1) return "negligible";
  if (r <= 0.3) return "small";
  if (r <= 0.5) return "medium";
  return "large";
}

WilcoxonResult wilcoxon_signed_rank(const std::vector<double>& a,
                                    const std::vector<double>& b) {
  if (a.size() != b.size())
    throw_input("wilcoxon: paired samples have different lengths");

  std::vector<double> diffs;
  diffs.reserve(a.size());
  for (size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    if (d != 0.0) diffs.push_back(d);
  }

  WilcoxonResult res;
  if (diffs.empty()) {
    res.no_difference = true;
    res.magnitude = std::string(effect_magnitude(0.0));
    return res;
  }
  if (diffs.size() < 5)
    throw_input("wilcoxon: needs at least 5 nonzero differences, got " +
                std::to_string(diffs.size()));

  size_t n = diffs.size();
  res.n_pairs = n;

  // Rank |d| ascending with average ranks for ties.
  std::vector<size_t> order(n);
  for (size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t x, size_t y) {
    return std::fabs(diffs[x]) < std::fabs(diffs[y]);
  });
  std::vector<double> rank(n, 0.0);
  double tie_term = 0.0;  // sum of t^3 - t over tie groups
  size_t i = 0;
  while (i < n) {
    size_t j = i;
    while (j + 1 < n &&
           std::fabs(diffs[order[j + 1]]) == std::fabs(diffs[order[i]]))
      ++j;
    double avg = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (size_t t = i; t <= j; ++t) rank[order[t]] = avg;
    double tie = static_cast<double>(j - i + 1);
    if (tie > 1.0) tie_term += tie * tie * tie - tie;
    i = j + 1;
  }

  double w_plus = 0.0, w_minus = 0.0;
  for (size_t t = 0; t < n; ++t) {
    if (diffs[t] > 0.0)
      w_plus += rank[t];
    else
      w_minus += rank[t];
  }
  res.w_plus = w_plus;
  res.w_minus = w_minus;

  double nd = static_cast<double>(n);
  double mean = nd * (nd + 1.0) / 4.0;
  double var = nd * (nd + 1.0) * (2.0 * nd + 1.0) / 24.0 - tie_term / 48.0;
  if (var <= 0.0) {
    // every difference ties with every other at the same magnitude and
    // the variance degenerates; report no evidence either way
    res.z = 0.0;
    res.p_two_sided = 1.0;
    res.effect_size_r = 0.0;
    res.magnitude = std::string(effect_magnitude(0.0));
    return res;
  }
  double sd = std::sqrt(var);

  // Continuity-corrected z with the sign of w_plus - mean, so that swapping
  // the paired samples flips z exactly.
  double delta = w_plus - mean;
  double z;
  if (delta > 0.0)
    z = (delta - 0.5) / sd;
  else if (delta < 0.0)
    z = (delta + 0.5) / sd;
  else
    z = 0.0;
  res.z = z;
  res.p_two_sided = std::erfc(std::fabs(z) / std::sqrt(2.0));
  if (res.p_two_sided > 1.0) res.p_two_sided = 1.0;
  res.effect_size_r = std::fabs(z) / std::sqrt(nd);
  res.magnitude = std::string(effect_magnitude(res.effect_size_r));
  res.significant = res.p_two_sided < 0.01;
  return res;
}

}  // namespace svaug
