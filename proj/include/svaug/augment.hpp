#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "svaug/corpus.hpp"
#include "svaug/rng.hpp"
#include "svaug/textprep.hpp"

namespace svaug {

enum class Technique : uint8_t {
  None = 0,
  OverSample,
  UnderSample,
  Insertion,
  Deletion,
  Substitution,
  SynonymReplacement,
  Combination,
  BackTranslation,
  Paraphrasing,
};

inline constexpr std::array<Technique, 10> kAllTechniques = {
    Technique::None,          Technique::OverSample,
    Technique::UnderSample,   Technique::Insertion,
    Technique::Deletion,      Technique::Substitution,
    Technique::SynonymReplacement, Technique::Combination,
    Technique::BackTranslation,    Technique::Paraphrasing,
};

std::string_view technique_name(Technique t);  // "over_sample", ...
std::optional<Technique> technique_from_name(std::string_view name);

bool technique_uses_text(Technique t);     // anything but None/Over/Under
bool technique_is_contextual(Technique t); // BackTranslation, Paraphrasing

// Number of token edits for a document of the given length:
// max(1, floor(change_fraction * length)). Zero-length input is an error.
size_t change_budget(size_t token_count, double change_fraction);

enum class BalanceTarget : uint8_t { MatchMajority = 0 };

struct AugmentationPlan {
  Technique technique = Technique::None;
  BalanceTarget balance_target = BalanceTarget::MatchMajority;
  double change_fraction = 0.2;
  double pool_min_doc_fraction = 0.001;
  uint64_t seed = 0;
  bool allow_fraction_above_cap = false;

  // change_fraction must sit in (0, 1]; values above 0.2 need the override.
  void validate() const;
};

// Frequent-word pool for Insertion/Substitution, built from training
// descriptions: lowercased stripped tokens, stop words excluded, document
// frequency >= ceil(fraction * n_docs). Sampling is df-weighted.
struct FrequentWordPool {
  std::vector<std::string> words;
  std::vector<uint64_t> weights;

  static FrequentWordPool build(const std::vector<std::string>& descriptions,
                                const StopWordSet& stops,
                                double min_doc_fraction);
  // "word weight" lines; '#' comments.
  static FrequentWordPool from_file(const std::string& path);

  bool empty() const { return words.empty(); }
  const std::string& sample(Rng& rng) const;
};

struct SynonymLexicon {
  std::unordered_map<std::string, std::vector<std::string>> entries;
  std::unordered_map<std::string, uint64_t> corpus_freq;

  // headword<TAB>syn1,syn2,... ; '#' comments.
  static SynonymLexicon load_file(const std::string& path);
  void set_corpus_frequencies(const std::vector<std::string>& descriptions,
                              const StopWordSet& stops);

  const std::vector<std::string>* candidates(std::string_view word) const;
};

// Token-level operations. Each consumes the token list by value and returns
// the edited list; the input order of untouched tokens is preserved.
std::vector<std::string> insert_words(std::vector<std::string> tokens,
                                      const FrequentWordPool& pool, size_t k,
                                      Rng& rng);
std::vector<std::string> delete_words(std::vector<std::string> tokens,
                                      size_t k, Rng& rng);

struct SubstituteResult {
  std::vector<std::string> tokens;
  size_t replaced = 0;
  size_t shortfall = 0;
};
SubstituteResult substitute_words(std::vector<std::string> tokens,
                                  const FrequentWordPool& pool, size_t k,
                                  Rng& rng);
SubstituteResult synonym_replace(std::vector<std::string> tokens,
                                 const SynonymLexicon& lexicon, size_t k,
                                 Rng& rng);

struct CombineResult {
  std::vector<std::string> tokens;
  size_t inserted = 0;
  size_t deleted = 0;
  size_t substituted = 0;
  size_t synonyms = 0;
  size_t shortfall = 0;
  size_t operation_kinds() const {
    return (inserted > 0) + (deleted > 0) + (substituted > 0) + (synonyms > 0);
  }
};
// Budget split over the four ops by a uniform random composition; shortfall
// from substitution/synonym phases is reassigned to insertion.
CombineResult combine(std::vector<std::string> tokens,
                      const FrequentWordPool& pool,
                      const SynonymLexicon& lexicon, size_t k, Rng& rng);

enum class ContextualMode { BackTranslate, Paraphrase };

class ContextualClient {
 public:
  virtual ~ContextualClient() = default;
  virtual std::string rewrite(const std::string& text, ContextualMode mode) = 0;
  virtual std::string name() const = 0;
};

// Offline stand-in: back-translation rotates the token sequence left by one,
// paraphrasing reverses it. Deterministic and invertible.
class StubContextualClient final : public ContextualClient {
 public:
  std::string rewrite(const std::string& text, ContextualMode mode) override;
  std::string name() const override { return "stub"; }
};

// POST {base_url}/v1/augment with {"text","mode"[,"prompt"]}; expects
// {"text": "..."} back. Up to max_attempts tries with linear backoff.
class HttpContextualClient final : public ContextualClient {
 public:
  explicit HttpContextualClient(std::string base_url, int max_attempts = 3,
                                int backoff_ms = 200);
  std::string rewrite(const std::string& text, ContextualMode mode) override;
  std::string name() const override { return "http:" + base_url_; }

 private:
  std::string base_url_;
  int max_attempts_;
  int backoff_ms_;
};

// AUGMENT_SERVICE_URL set -> HTTP client, otherwise the stub.
std::unique_ptr<ContextualClient> make_contextual_client_from_env();

struct ContextualOutcome {
  std::optional<std::string> text;  // empty optional: unusable, see note
  std::string note;                 // "identical" / "empty-response" / error
};
ContextualOutcome contextual_augment(const std::string& text,
                                     ContextualMode mode,
                                     ContextualClient& client);

// One training sample, original or synthetic. Synthetic samples remember
// their origin; they never leave the training side of a round.
struct TrainSample {
  std::string id;
  std::string description;
  LabelSet labels{};
  Technique provenance = Technique::None;
  std::string origin_id;            // empty for originals
  int32_t corpus_index = -1;        // originals: index into the input span
  std::string note;

  bool augmented() const { return !origin_id.empty(); }
};

struct AugmentResources {
  const FrequentWordPool* pool = nullptr;
  const SynonymLexicon* lexicon = nullptr;
  ContextualClient* client = nullptr;
};

struct BalanceResult {
  std::vector<TrainSample> samples;
  std::vector<std::string> diagnostics;
};

// Balances class counts for one task over the given training records.
// None copies the input; OverSample duplicates minorities to the majority
// count; UnderSample trims every class to the minority count (every class
// must be present); text techniques synthesize minority samples up to the
// majority count.
BalanceResult balance_training_set(const std::vector<VulnRecord>& train,
                                   CvssMetric task,
                                   const AugmentationPlan& plan,
                                   const AugmentResources& res);

}  // namespace svaug
