#include "svaug/textprep.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>

#include "svaug/error.hpp"
#include "svaug/rng.hpp"

namespace svaug {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)); }

bool is_trailing_punct(char c) {
  switch (c) {
    case '.': case ',': case ';': case ':': case '!': case '?':
    case ')': case ']': case '}': case '"': case '\'': case '`':
      return true;
    default:
      return false;
  }
}

bool is_leading_punct(char c) {
  switch (c) {
    case '(': case '[': case '{': case '"': case '\'': case '`':
      return true;
    default:
      return false;
  }
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    size_t b = i;
    while (i < text.size() && !is_space(text[i])) ++i;
    if (i > b) out.emplace_back(text.substr(b, i - b));
  }
  return out;
}

std::string_view strip_punctuation(std::string_view token) {
  while (!token.empty() && is_trailing_punct(token.back()))
    token.remove_suffix(1);
  while (!token.empty() && is_leading_punct(token.front()))
    token.remove_prefix(1);
  return token;
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

StopWordSet StopWordSet::from_words(const std::vector<std::string>& words) {
  StopWordSet s;
  for (const auto& w : words) s.words_.insert(to_lower_ascii(w));
  return s;
}

StopWordSet StopWordSet::load_files(const std::vector<std::string>& paths) {
  StopWordSet s;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw_input("cannot open stop-word file: " + path);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      size_t b = line.find_first_not_of(" \t");
      if (b == std::string::npos) continue;
      size_t e = line.find_last_not_of(" \t");
      std::string word = line.substr(b, e - b + 1);
      if (word.empty() || word[0] == '#') continue;
      s.words_.insert(to_lower_ascii(word));
    }
  }
  return s;
}

bool StopWordSet::contains(std::string_view word) const {
  return words_.count(std::string(word)) > 0;
}

const std::string& StemCache::stem(const std::string& word) {
  auto it = cache_.find(word);
  if (it != cache_.end()) return it->second;
  return cache_.emplace(word, porter_stem(word)).first->second;
}

TokenizedDoc preprocess(std::string_view text, const StopWordSet& stops,
                        StemCache* cache) {
  TokenizedDoc doc;
  doc.raw_tokens = tokenize(text);
  doc.proc_tokens.reserve(doc.raw_tokens.size());
  for (const auto& raw : doc.raw_tokens) {
    std::string_view stripped = strip_punctuation(raw);
    if (stripped.empty()) continue;
    std::string lowered = to_lower_ascii(stripped);
    if (stops.contains(lowered)) continue;
    std::string stemmed = cache ? cache->stem(lowered) : porter_stem(lowered);
    if (stemmed.empty()) continue;
    doc.proc_tokens.push_back(std::move(stemmed));
  }
  return doc;
}

std::optional<uint32_t> Vocabulary::lookup(std::string_view term) const {
  auto it = index.find(std::string(term));
  if (it == index.end()) return std::nullopt;
  return it->second;
}

uint64_t Vocabulary::content_hash() const {
  uint64_t h = 0xcbf29ce484222325ULL;
  h = fnv1a_u64(n_docs, h);
  for (size_t i = 0; i < terms.size(); ++i) {
    h = fnv1a(terms[i], h);
    h = fnv1a_u64(doc_freq[i], h);
  }
  return h;
}

Vocabulary fit_vocabulary(const std::vector<TokenizedDoc>& docs,
                          double min_doc_fraction) {
  if (min_doc_fraction < 0.0 || min_doc_fraction > 1.0)
    throw_input("min_doc_fraction must be in [0, 1]");
  // std::map keeps term iteration deterministic while counting.
  std::map<std::string, uint32_t> df;
  for (const auto& doc : docs) {
    std::vector<std::string_view> seen;
    seen.reserve(doc.proc_tokens.size());
    for (const auto& t : doc.proc_tokens) seen.push_back(t);
    std::sort(seen.begin(), seen.end());
    seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
    for (auto t : seen) ++df[std::string(t)];
  }

  // ceil with a tiny backoff: 0.001 * 1000 is 1.0000000000000002 in binary
  // and must still yield a threshold of 1.
  double raw = min_doc_fraction * static_cast<double>(docs.size());
  uint64_t threshold =
      raw <= 0.0 ? 0 : static_cast<uint64_t>(std::ceil(raw - 1e-9));

  Vocabulary vocab;
  vocab.n_docs = docs.size();
  vocab.min_doc_fraction = min_doc_fraction;
  std::vector<std::pair<std::string, uint32_t>> kept;
  for (auto& [term, count] : df) {
    if (count >= threshold) kept.emplace_back(term, count);
  }
  if (kept.empty())
    throw_empty("vocabulary is empty after the document-frequency threshold");
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  vocab.terms.reserve(kept.size());
  vocab.doc_freq.reserve(kept.size());
  for (uint32_t i = 0; i < kept.size(); ++i) {
    vocab.index.emplace(kept[i].first, i);
    vocab.terms.push_back(std::move(kept[i].first));
    vocab.doc_freq.push_back(kept[i].second);
  }
  return vocab;
}

}  // namespace svaug
