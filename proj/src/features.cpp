#include "svaug/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "svaug/error.hpp"

namespace svaug {

double SparseVector::norm() const {
  double s = 0.0;
  for (const auto& [idx, w] : entries) s += w * w;
  return std::sqrt(s);
}

double SparseVector::dot(const SparseVector& other) const {
  double s = 0.0;
  size_t i = 0, j = 0;
  while (i < entries.size() && j < other.entries.size()) {
    if (entries[i].first < other.entries[j].first) {
      ++i;
    } else if (entries[i].first > other.entries[j].first) {
      ++j;
    } else {
      s += entries[i].second * other.entries[j].second;
      ++i;
      ++j;
    }
  }
  return s;
}

TfIdfModel TfIdfModel::fit(const std::vector<TokenizedDoc>& docs,
                           const Vocabulary& vocab, bool normalize) {
  if (docs.empty()) throw_empty("cannot fit tf-idf on zero documents");
  TfIdfModel model;
  model.vocab = vocab;
  model.normalize = normalize;
  model.idf.resize(vocab.size());
  double n = static_cast<double>(vocab.n_docs);
  for (size_t i = 0; i < vocab.size(); ++i) {
    double df = static_cast<double>(vocab.doc_freq[i]);
    model.idf[i] = std::log((1.0 + n) / (1.0 + df)) + 1.0;
  }
  return model;
}

SparseVector TfIdfModel::transform(const TokenizedDoc& doc) const {
  std::map<uint32_t, uint32_t> counts;
  for (const auto& t : doc.proc_tokens) {
    auto idx = vocab.lookup(t);
    if (idx) ++counts[*idx];
  }
  SparseVector v;
  v.dims = static_cast<uint32_t>(vocab.size());
  v.entries.reserve(counts.size());
  for (const auto& [idx, count] : counts) {
    double w = static_cast<double>(count) * idf[idx];
    if (w != 0.0) v.entries.emplace_back(idx, w);
  }
  if (normalize) {
    double n = v.norm();
    if (n > 0.0) {
      for (auto& [idx, w] : v.entries) w /= n;
    }
  }
  return v;
}

std::vector<SparseVector> TfIdfModel::transform_all(
    const std::vector<TokenizedDoc>& docs) const {
  std::vector<SparseVector> out;
  out.reserve(docs.size());
  for (const auto& d : docs) out.push_back(transform(d));
  return out;
}

double cosine(const SparseVector& a, const SparseVector& b) {
  if (a.dims != b.dims)
    throw_input("cosine: dimension mismatch (" + std::to_string(a.dims) +
                " vs " + std::to_string(b.dims) + ")");
  double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

std::string to_triplets(const std::vector<SparseVector>& rows) {
  std::string out;
  char buf[64];
  for (size_t r = 0; r < rows.size(); ++r) {
    for (const auto& [idx, w] : rows[r].entries) {
      std::snprintf(buf, sizeof(buf), "%zu %u %.17g\n", r, idx, w);
      out += buf;
    }
  }
  return out;
}

}  // namespace svaug
