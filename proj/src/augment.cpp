#include "svaug/augment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "svaug/error.hpp"

namespace svaug {

namespace {

constexpr std::array<std::string_view, 10> kTechniqueNames = {
    "none",         "over_sample",  "under_sample",
    "insertion",    "deletion",     "substitution",
    "synonym_replacement", "combination", "back_translation",
    "paraphrasing"};

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out.push_back(' ');
    out += tokens[i];
  }
  return out;
}

std::string normalized_word(const std::string& token) {
  return to_lower_ascii(strip_punctuation(token));
}

uint64_t df_threshold(double fraction, size_t n_docs) {
  double raw = fraction * static_cast<double>(n_docs);
  return raw <= 0.0 ? 0 : static_cast<uint64_t>(std::ceil(raw - 1e-9));
}

}  // namespace

std::string_view technique_name(Technique t) {
  return kTechniqueNames[static_cast<size_t>(t)];
}

std::optional<Technique> technique_from_name(std::string_view name) {
  std::string n = to_lower_ascii(name);
  std::replace(n.begin(), n.end(), '-', '_');
  for (size_t i = 0; i < kTechniqueNames.size(); ++i)
    if (n == kTechniqueNames[i]) return static_cast<Technique>(i);
  return std::nullopt;
}

bool technique_uses_text(Technique t) {
  switch (t) {
    case Technique::None:
    case Technique::OverSample:
    case Technique::UnderSample:
      return false;
    default:
      return true;
  }
}

bool technique_is_contextual(Technique t) {
  return t == Technique::BackTranslation || t == Technique::Paraphrasing;
}

size_t change_budget(size_t token_count, double change_fraction) {
  if (token_count == 0) throw_input("change budget of an empty document");
  if (change_fraction <= 0.0 || change_fraction > 1.0)
    throw_input("change_fraction must be in (0, 1]");
  double raw = change_fraction * static_cast<double>(token_count);
  size_t k = static_cast<size_t>(std::floor(raw + 1e-9));
  return std::max<size_t>(1, k);
}

void AugmentationPlan::validate() const {
  if (change_fraction <= 0.0 || change_fraction > 1.0)
    throw_input("change_fraction must be in (0, 1]");
  if (change_fraction > 0.2 && !allow_fraction_above_cap)
    throw_input("change_fraction above 0.2 needs the explicit override");
  if (pool_min_doc_fraction < 0.0 || pool_min_doc_fraction > 1.0)
    throw_input("pool_min_doc_fraction must be in [0, 1]");
}

FrequentWordPool FrequentWordPool::build(
    const std::vector<std::string>& descriptions, const StopWordSet& stops,
    double min_doc_fraction) {
  std::map<std::string, uint64_t> df;
  for (const auto& text : descriptions) {
    std::vector<std::string> words;
    for (const auto& tok : tokenize(text)) {
      std::string w = normalized_word(tok);
      if (w.empty() || stops.contains(w)) continue;
      words.push_back(std::move(w));
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (auto& w : words) ++df[w];
  }
  uint64_t threshold = df_threshold(min_doc_fraction, descriptions.size());
  FrequentWordPool pool;
  for (auto& [word, count] : df) {
    if (count >= threshold) {
      pool.words.push_back(word);
      pool.weights.push_back(count);
    }
  }
  return pool;
}

FrequentWordPool FrequentWordPool::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("cannot open word pool file: " + path);
  FrequentWordPool pool;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string word;
    uint64_t weight = 1;
    ss >> word >> weight;
    if (word.empty()) continue;
    pool.words.push_back(to_lower_ascii(word));
    pool.weights.push_back(weight == 0 ? 1 : weight);
  }
  return pool;
}

const std::string& FrequentWordPool::sample(Rng& rng) const {
  if (words.empty()) throw_input("sampling from an empty word pool");
  return words[rng.weighted_choice(weights)];
}

SynonymLexicon SynonymLexicon::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw_input("cannot open synonym lexicon: " + path);
  SynonymLexicon lex;
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    size_t tab = line.find('\t');
    if (tab == std::string::npos)
      throw_input("synonym lexicon line " + std::to_string(lineno) +
                  " has no tab separator");
    std::string head = to_lower_ascii(line.substr(0, tab));
    std::vector<std::string> syns;
    std::string rest = line.substr(tab + 1);
    size_t start = 0;
    while (start <= rest.size()) {
      size_t comma = rest.find(',', start);
      std::string syn = to_lower_ascii(
          rest.substr(start, comma == std::string::npos ? std::string::npos
                                                        : comma - start));
      if (!syn.empty() && syn != head) syns.push_back(syn);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (!head.empty() && !syns.empty()) {
      auto& slot = lex.entries[head];
      for (auto& s : syns)
        if (std::find(slot.begin(), slot.end(), s) == slot.end())
          slot.push_back(s);
    }
  }
  return lex;
}

void SynonymLexicon::set_corpus_frequencies(
    const std::vector<std::string>& descriptions, const StopWordSet& stops) {
  corpus_freq.clear();
  for (const auto& text : descriptions) {
    std::vector<std::string> words;
    for (const auto& tok : tokenize(text)) {
      std::string w = normalized_word(tok);
      if (w.empty() || stops.contains(w)) continue;
      words.push_back(std::move(w));
    }
    std::sort(words.begin(), words.end());
    words.erase(std::unique(words.begin(), words.end()), words.end());
    for (auto& w : words) ++corpus_freq[w];
  }
}

const std::vector<std::string>* SynonymLexicon::candidates(
    std::string_view word) const {
  auto it = entries.find(std::string(word));
  if (it == entries.end()) return nullptr;
  return &it->second;
}

std::vector<std::string> insert_words(std::vector<std::string> tokens,
                                      const FrequentWordPool& pool, size_t k,
                                      Rng& rng) {
  if (tokens.empty()) throw_input("insert into an empty document");
  if (pool.empty()) throw_input("insertion needs a nonempty word pool");
  for (size_t i = 0; i < k; ++i) {
    size_t pos = static_cast<size_t>(rng.bounded(tokens.size() + 1));
    tokens.insert(tokens.begin() + static_cast<ptrdiff_t>(pos),
                  pool.sample(rng));
  }
  return tokens;
}

std::vector<std::string> delete_words(std::vector<std::string> tokens,
                                      size_t k, Rng& rng) {
  if (k >= tokens.size())
    throw_input("deletion budget " + std::to_string(k) +
                " would empty a document of " + std::to_string(tokens.size()) +
                " tokens");
  auto victims = rng.sample_indices(static_cast<uint32_t>(tokens.size()),
                                    static_cast<uint32_t>(k));
  std::sort(victims.begin(), victims.end(), std::greater<uint32_t>());
  for (uint32_t v : victims)
    tokens.erase(tokens.begin() + static_cast<ptrdiff_t>(v));
  return tokens;
}

SubstituteResult substitute_words(std::vector<std::string> tokens,
                                  const FrequentWordPool& pool, size_t k,
                                  Rng& rng) {
  if (tokens.empty()) throw_input("substitute in an empty document");
  if (pool.empty()) throw_input("substitution needs a nonempty word pool");
  SubstituteResult res;
  size_t limit = std::min(k, tokens.size());
  auto positions = rng.sample_indices(static_cast<uint32_t>(tokens.size()),
                                      static_cast<uint32_t>(limit));
  res.shortfall = k - limit;
  for (uint32_t pos : positions) {
    std::string original = normalized_word(tokens[pos]);
    bool done = false;
    for (int attempt = 0; attempt < 16; ++attempt) {
      const std::string& cand = pool.sample(rng);
      if (cand != original) {
        tokens[pos] = cand;
        ++res.replaced;
        done = true;
        break;
      }
    }
    if (!done) ++res.shortfall;
  }
  res.tokens = std::move(tokens);
  return res;
}

SubstituteResult synonym_replace(std::vector<std::string> tokens,
                                 const SynonymLexicon& lexicon, size_t k,
                                 Rng& rng) {
  if (tokens.empty()) throw_input("synonym replacement in an empty document");
  SubstituteResult res;
  std::vector<uint32_t> eligible;
  for (uint32_t i = 0; i < tokens.size(); ++i) {
    std::string w = normalized_word(tokens[i]);
    const auto* cands = lexicon.candidates(w);
    if (cands && !cands->empty()) eligible.push_back(i);
  }
  size_t take = std::min(k, eligible.size());
  res.shortfall = k - take;
  auto picks = rng.sample_indices(static_cast<uint32_t>(eligible.size()),
                                  static_cast<uint32_t>(take));
  for (uint32_t p : picks) {
    uint32_t pos = eligible[p];
    std::string w = normalized_word(tokens[pos]);
    const auto* cands = lexicon.candidates(w);
    std::vector<uint64_t> weights;
    weights.reserve(cands->size());
    for (const auto& c : *cands) {
      auto it = lexicon.corpus_freq.find(c);
      weights.push_back(it == lexicon.corpus_freq.end() ? 0 : it->second);
    }
    const std::string& chosen = (*cands)[rng.weighted_choice(weights)];
    tokens[pos] = chosen;
    ++res.replaced;
  }
  res.tokens = std::move(tokens);
  return res;
}

CombineResult combine(std::vector<std::string> tokens,
                      const FrequentWordPool& pool,
                      const SynonymLexicon& lexicon, size_t k, Rng& rng) {
  if (tokens.empty()) throw_input("combine on an empty document");
  CombineResult res;

  // Uniform composition of k into four parts via stars and bars.
  std::array<size_t, 4> part{};
  if (k > 0) {
    auto bars = rng.sample_indices(static_cast<uint32_t>(k + 3), 3);
    std::sort(bars.begin(), bars.end());
    size_t b1 = bars[0], b2 = bars[1], b3 = bars[2];
    part[0] = b1;
    part[1] = b2 - b1 - 1;
    part[2] = b3 - b2 - 1;
    part[3] = k + 3 - b3 - 1;
  }
  size_t k_ins = part[0], k_sub = part[1], k_syn = part[2], k_del = part[3];

  if (pool.empty()) {
    res.shortfall += k_ins + k_sub;
    k_ins = 0;
    k_sub = 0;
  }

  if (k_ins > 0) {
    tokens = insert_words(std::move(tokens), pool, k_ins, rng);
    res.inserted = k_ins;
  }
  size_t reassign = 0;
  if (k_sub > 0) {
    auto sub = substitute_words(std::move(tokens), pool, k_sub, rng);
    tokens = std::move(sub.tokens);
    res.substituted = sub.replaced;
    reassign += sub.shortfall;
  }
  if (k_syn > 0) {
    auto syn = synonym_replace(std::move(tokens), lexicon, k_syn, rng);
    tokens = std::move(syn.tokens);
    res.synonyms = syn.replaced;
    reassign += syn.shortfall;
  }

  // Deleting everything is not allowed; surplus deletions become insertions.
  if (k_del >= tokens.size()) {
    size_t allowed = tokens.empty() ? 0 : tokens.size() - 1;
    reassign += k_del - allowed;
    k_del = allowed;
  }
  if (reassign > 0) {
    if (!pool.empty()) {
      tokens = insert_words(std::move(tokens), pool, reassign, rng);
      res.inserted += reassign;
    } else {
      res.shortfall += reassign;
    }
  }
  if (k_del > 0) {
    tokens = delete_words(std::move(tokens), k_del, rng);
    res.deleted = k_del;
  }
  res.tokens = std::move(tokens);
  return res;
}

ContextualOutcome contextual_augment(const std::string& text,
                                     ContextualMode mode,
                                     ContextualClient& client) {
  ContextualOutcome out;
  std::string rewritten;
  try {
    rewritten = client.rewrite(text, mode);
  } catch (const Error& e) {
    out.note = std::string("transport-error: ") + e.what();
    return out;
  }
  bool blank = true;
  for (char c : rewritten)
    if (!std::isspace(static_cast<unsigned char>(c))) {
      blank = false;
      break;
    }
  if (blank) {
    out.note = "empty-response";
    return out;
  }
  out.text = rewritten;
  if (rewritten == text) out.note = "identical";
  return out;
}

namespace {

struct ClassBuckets {
  std::array<std::vector<uint32_t>, kNumClasses> members;
  std::array<size_t, kNumClasses> counts{};
  size_t majority = 0;
  size_t minority = SIZE_MAX;
};

ClassBuckets bucket_by_class(const std::vector<VulnRecord>& train,
                             CvssMetric task) {
  ClassBuckets b;
  for (uint32_t i = 0; i < train.size(); ++i)
    b.members[train[i].labels[static_cast<size_t>(task)]].push_back(i);
  for (size_t c = 0; c < kNumClasses; ++c) {
    b.counts[c] = b.members[c].size();
    b.majority = std::max(b.majority, b.counts[c]);
    b.minority = std::min(b.minority, b.counts[c]);
  }
  return b;
}

TrainSample original_sample(const VulnRecord& rec, uint32_t index) {
  TrainSample s;
  s.id = rec.id;
  s.description = rec.description;
  s.labels = rec.labels;
  s.provenance = Technique::None;
  s.corpus_index = static_cast<int32_t>(index);
  return s;
}

// One synthetic text for the given origin; empty optional when this origin
// cannot produce a usable rewrite under the technique.
std::optional<std::string> synthesize_text(const VulnRecord& origin,
                                           Technique technique,
                                           const AugmentationPlan& plan,
                                           const AugmentResources& res,
                                           Rng& rng, std::string& note) {
  std::vector<std::string> tokens = tokenize(origin.description);
  if (tokens.empty()) {
    note = "empty-description";
    return std::nullopt;
  }
  if (technique_is_contextual(technique)) {
    if (!res.client)
      throw_input("contextual augmentation needs a rewrite client");
    ContextualMode mode = technique == Technique::BackTranslation
                              ? ContextualMode::BackTranslate
                              : ContextualMode::Paraphrase;
    auto outcome = contextual_augment(origin.description, mode, *res.client);
    if (!outcome.text) {
      note = outcome.note;
      return std::nullopt;
    }
    note = outcome.note;
    return outcome.text;
  }

  size_t k = change_budget(tokens.size(), plan.change_fraction);
  switch (technique) {
    case Technique::Insertion: {
      if (!res.pool || res.pool->empty())
        throw_input("insertion needs a frequent-word pool");
      auto out = insert_words(std::move(tokens), *res.pool, k, rng);
      return join_tokens(out);
    }
    case Technique::Deletion: {
      if (k >= tokens.size()) {
        note = "too-short-to-delete";
        return std::nullopt;
      }
      auto out = delete_words(std::move(tokens), k, rng);
      return join_tokens(out);
    }
    case Technique::Substitution: {
      if (!res.pool || res.pool->empty())
        throw_input("substitution needs a frequent-word pool");
      auto out = substitute_words(std::move(tokens), *res.pool, k, rng);
      if (out.replaced == 0) {
        note = "no-replacement-found";
        return std::nullopt;
      }
      if (out.shortfall > 0)
        note = "shortfall=" + std::to_string(out.shortfall);
      return join_tokens(out.tokens);
    }
    case Technique::SynonymReplacement: {
      if (!res.lexicon)
        throw_input("synonym replacement needs a lexicon");
      auto out = synonym_replace(std::move(tokens), *res.lexicon, k, rng);
      if (out.replaced == 0) {
        note = "no-synonym-found";
        return std::nullopt;
      }
      if (out.shortfall > 0)
        note = "shortfall=" + std::to_string(out.shortfall);
      return join_tokens(out.tokens);
    }
    case Technique::Combination: {
      if (!res.pool || !res.lexicon)
        throw_input("combination needs a word pool and a lexicon");
      auto original = tokens;
      auto out = combine(std::move(tokens), *res.pool, *res.lexicon, k, rng);
      if (out.tokens == original) {
        note = "no-edit-applied";
        return std::nullopt;
      }
      if (out.shortfall > 0)
        note = "shortfall=" + std::to_string(out.shortfall);
      return join_tokens(out.tokens);
    }
    default:
      throw_internal("synthesize_text called with a non-text technique");
  }
}

}  // namespace

BalanceResult balance_training_set(const std::vector<VulnRecord>& train,
                                   CvssMetric task,
                                   const AugmentationPlan& plan,
                                   const AugmentResources& res) {
  plan.validate();
  if (train.empty()) throw_empty("balance: no training records");

  BalanceResult result;
  ClassBuckets buckets = bucket_by_class(train, task);

  if (plan.technique == Technique::None) {
    for (uint32_t i = 0; i < train.size(); ++i)
      result.samples.push_back(original_sample(train[i], i));
    return result;
  }

  if (plan.technique == Technique::UnderSample) {
    for (size_t c = 0; c < kNumClasses; ++c) {
      if (buckets.counts[c] == 0)
        throw_input("under-sampling requires every class in the training "
                    "folds; class " +
                    std::string(metric_classes(task)[c]) + " of " +
                    std::string(metric_name(task)) + " is absent");
    }
    std::vector<char> keep(train.size(), 0);
    for (size_t c = 0; c < kNumClasses; ++c) {
      if (buckets.counts[c] == buckets.minority) {
        for (uint32_t idx : buckets.members[c]) keep[idx] = 1;
        continue;
      }
      Rng rng(mix_seed({plan.seed, 0x5eedu, static_cast<uint64_t>(task),
                        static_cast<uint64_t>(c)}));
      auto chosen =
          rng.sample_indices(static_cast<uint32_t>(buckets.counts[c]),
                             static_cast<uint32_t>(buckets.minority));
      for (uint32_t pick : chosen) keep[buckets.members[c][pick]] = 1;
      result.diagnostics.push_back(
          "under_sample: class " + std::string(metric_classes(task)[c]) +
          " trimmed from " + std::to_string(buckets.counts[c]) + " to " +
          std::to_string(buckets.minority));
    }
    for (uint32_t i = 0; i < train.size(); ++i)
      if (keep[i]) result.samples.push_back(original_sample(train[i], i));
    return result;
  }

  // Everything else keeps the originals and adds synthetic minority samples.
  for (uint32_t i = 0; i < train.size(); ++i)
    result.samples.push_back(original_sample(train[i], i));

  size_t sequence = 0;
  for (size_t c = 0; c < kNumClasses; ++c) {
    size_t need = buckets.majority - buckets.counts[c];
    if (need == 0) continue;
    if (buckets.counts[c] == 0) {
      result.diagnostics.push_back(
          "class " + std::string(metric_classes(task)[c]) + " of " +
          std::string(metric_name(task)) +
          " has no training samples; left un-augmented");
      continue;
    }
    Rng select_rng(mix_seed({plan.seed, 0x5e1u, static_cast<uint64_t>(task),
                             static_cast<uint64_t>(c)}));
    size_t produced = 0;
    size_t failures = 0;
    while (produced < need) {
      const VulnRecord& origin =
          train[buckets.members[c][select_rng.bounded(buckets.counts[c])]];
      TrainSample sample;
      sample.labels = origin.labels;
      sample.origin_id = origin.id;
      sample.provenance = plan.technique;

      if (plan.technique == Technique::OverSample) {
        sample.description = origin.description;
        sample.id = origin.id + "+over_sample#" + std::to_string(sequence);
        result.samples.push_back(std::move(sample));
        ++produced;
        ++sequence;
        continue;
      }

      Rng gen_rng(mix_seed({plan.seed, fnv1a(origin.id),
                            static_cast<uint64_t>(sequence),
                            static_cast<uint64_t>(failures)}));
      std::string note;
      auto text = synthesize_text(origin, plan.technique, plan, res, gen_rng,
                                  note);
      if (!text) {
        ++failures;
        if (failures >= 8 * need + 8) {
          result.diagnostics.push_back(
              "class " + std::string(metric_classes(task)[c]) + " of " +
              std::string(metric_name(task)) + ": gave up after " +
              std::to_string(failures) + " attempts (" + note + "); " +
              std::to_string(need - produced) + " samples short");
          break;
        }
        continue;
      }
      sample.description = std::move(*text);
      sample.note = note;
      sample.id = origin.id + "+" +
                  std::string(technique_name(plan.technique)) + "#" +
                  std::to_string(sequence);
      result.samples.push_back(std::move(sample));
      ++produced;
      ++sequence;
    }
  }
  return result;
}

}  // namespace svaug
