#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "svaug/textprep.hpp"

namespace svaug {

struct SparseVector {
  uint32_t dims = 0;
  // (index, weight), strictly ascending indices, weights nonzero.
  std::vector<std::pair<uint32_t, double>> entries;

  double norm() const;
  double dot(const SparseVector& other) const;
};

// Smoothed idf: ln((1 + N) / (1 + df)) + 1. Raw term counts, L2-normalized
// rows by default.
struct TfIdfModel {
  Vocabulary vocab;
  std::vector<double> idf;
  bool normalize = true;

  static TfIdfModel fit(const std::vector<TokenizedDoc>& docs,
                        const Vocabulary& vocab, bool normalize = true);
  SparseVector transform(const TokenizedDoc& doc) const;
  std::vector<SparseVector> transform_all(
      const std::vector<TokenizedDoc>& docs) const;
};

// 0.0 when either vector is all zero; errors on dimension mismatch.
double cosine(const SparseVector& a, const SparseVector& b);

// Debug export, one "row col weight" line per entry.
std::string to_triplets(const std::vector<SparseVector>& rows);

}  // namespace svaug
