#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace svaug {

// Whitespace tokenization; no empty tokens.
std::vector<std::string> tokenize(std::string_view text);

// Removes sentence punctuation and enclosing quotes/brackets from the token
// ends only; interior characters are untouched, so "file.c" and
// "cross-site" survive. Returns a substring of the input.
std::string_view strip_punctuation(std::string_view token);

std::string to_lower_ascii(std::string_view s);

// Porter (1980), all five steps. Tokens that are not purely a-z after
// lowercasing pass through unchanged, as do tokens shorter than 3 letters.
std::string porter_stem(std::string_view word);

class StopWordSet {
 public:
  static StopWordSet from_words(const std::vector<std::string>& words);
  // Union of one-word-per-line files; '#' lines are comments.
  static StopWordSet load_files(const std::vector<std::string>& paths);

  bool contains(std::string_view word) const;
  size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

struct TokenizedDoc {
  std::vector<std::string> raw_tokens;
  std::vector<std::string> proc_tokens;  // stripped, lowercased, stopped, stemmed
};

// Memoizes stem lookups; safe to reuse across documents.
class StemCache {
 public:
  const std::string& stem(const std::string& word);

 private:
  std::unordered_map<std::string, std::string> cache_;
};

TokenizedDoc preprocess(std::string_view text, const StopWordSet& stops,
                        StemCache* cache = nullptr);

struct Vocabulary {
  std::vector<std::string> terms;  // index order: df desc, then lexicographic
  std::unordered_map<std::string, uint32_t> index;
  std::vector<uint32_t> doc_freq;
  uint64_t n_docs = 0;
  double min_doc_fraction = 0.0;

  size_t size() const { return terms.size(); }
  std::optional<uint32_t> lookup(std::string_view term) const;
  uint64_t content_hash() const;
};

// Document-frequency threshold: term kept when df >= ceil(fraction * n_docs);
// fraction 0 keeps every distinct term. Empty result is an error.
Vocabulary fit_vocabulary(const std::vector<TokenizedDoc>& docs,
                          double min_doc_fraction);

}  // namespace svaug
