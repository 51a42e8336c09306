#include "svaug/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "report_internal.hpp"
#include "svaug/error.hpp"
#include "svaug/features.hpp"
#include "svaug/rng.hpp"

namespace svaug {

using json = nlohmann::json;

namespace {

template <typename T>
void dedup_keep_first(std::vector<T>& v) {
  std::vector<T> out;
  for (const T& x : v)
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  v = std::move(out);
}

std::string_view format_name(FeedFormat f) {
  return f == FeedFormat::NvdJson11 ? "nvd-json-1.1" : "csv";
}

std::string basename_of(const std::string& path) {
  return std::filesystem::path(path).filename().string();
}

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string out;
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += ' ';
    out += tokens[i];
  }
  return out;
}

template <typename F>
int guard(F&& body) {
  try {
    return body();
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return e.exit_code();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return static_cast<int>(ErrorCode::Internal);
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw_input("config must be a JSON object");

  ExperimentConfig cfg;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key == "corpus") {
        cfg.corpus_path = value.get<std::string>();
      } else if (key == "corpus_format") {
        auto f = feed_format_from_name(value.get<std::string>());
        if (!f)
          throw_input("config: unknown corpus format \"" +
                      value.get<std::string>() + "\"");
        cfg.corpus_format = *f;
      } else if (key == "tasks") {
        for (const auto& name : value) {
          auto m = metric_from_name(name.get<std::string>());
          if (!m)
            throw_input("config: unknown task \"" + name.get<std::string>() +
                        "\"");
          cfg.tasks.push_back(*m);
        }
      } else if (key == "techniques") {
        for (const auto& name : value) {
          auto t = technique_from_name(name.get<std::string>());
          if (!t)
            throw_input("config: unknown technique \"" +
                        name.get<std::string>() + "\"");
          cfg.techniques.push_back(*t);
        }
      } else if (key == "models") {
        for (const auto& name : value) {
          auto m = model_kind_from_name(name.get<std::string>());
          if (!m)
            throw_input("config: unknown model \"" + name.get<std::string>() +
                        "\"");
          cfg.models.push_back(*m);
        }
      } else if (key == "full_grid") {
        cfg.use_full_grid = value.get<bool>();
      } else if (key == "seeds") {
        for (const auto& s : value) cfg.seeds.push_back(s.get<uint64_t>());
      } else if (key == "change_fraction") {
        cfg.change_fraction = value.get<double>();
      } else if (key == "allow_fraction_above_cap") {
        cfg.allow_fraction_above_cap = value.get<bool>();
      } else if (key == "pool_min_doc_fraction") {
        cfg.pool_min_doc_fraction = value.get<double>();
      } else if (key == "vocab_min_doc_fraction") {
        cfg.vocab_min_doc_fraction = value.get<double>();
      } else if (key == "assets_dir") {
        cfg.assets_dir = value.get<std::string>();
      } else if (key == "out_dir") {
        cfg.out_dir = value.get<std::string>();
      } else if (key == "dump_features") {
        cfg.dump_features = value.get<bool>();
      } else {
        throw_input("config: unknown key \"" + key + "\"");
      }
    }
  } catch (const json::exception& e) {
    throw_input(std::string("config: ") + e.what());
  }
  return cfg;
}

ExperimentConfig ExperimentConfig::from_json_file(const std::string& path) {
  return from_json(read_file(path));
}

std::string ExperimentConfig::to_json() const {
  json j;
  j["corpus"] = corpus_path;
  j["corpus_format"] = std::string(format_name(corpus_format));
  json tasks_json = json::array();
  for (CvssMetric m : tasks) tasks_json.push_back(std::string(metric_name(m)));
  j["tasks"] = std::move(tasks_json);
  json tech_json = json::array();
  for (Technique t : techniques)
    tech_json.push_back(std::string(technique_name(t)));
  j["techniques"] = std::move(tech_json);
  json model_json = json::array();
  for (ModelKind m : models)
    model_json.push_back(std::string(model_kind_name(m)));
  j["models"] = std::move(model_json);
  j["full_grid"] = use_full_grid;
  j["seeds"] = seeds;
  j["change_fraction"] = change_fraction;
  j["allow_fraction_above_cap"] = allow_fraction_above_cap;
  j["pool_min_doc_fraction"] = pool_min_doc_fraction;
  j["vocab_min_doc_fraction"] = vocab_min_doc_fraction;
  j["assets_dir"] = assets_dir;
  j["out_dir"] = out_dir;
  j["dump_features"] = dump_features;
  return j.dump(2);
}

void ExperimentConfig::normalize() {
  if (corpus_path.empty()) throw_input("config: a corpus path is required");
  if (tasks.empty()) tasks.assign(kAllMetrics.begin(), kAllMetrics.end());
  dedup_keep_first(tasks);
  if (std::find(techniques.begin(), techniques.end(), Technique::None) ==
      techniques.end())
    techniques.insert(techniques.begin(), Technique::None);
  dedup_keep_first(techniques);
  if (models.empty()) models.push_back(ModelKind::RandomForest);
  dedup_keep_first(models);
  if (seeds.empty()) seeds.push_back(1);
  dedup_keep_first(seeds);

  AugmentationPlan probe;
  probe.change_fraction = change_fraction;
  probe.pool_min_doc_fraction = pool_min_doc_fraction;
  probe.allow_fraction_above_cap = allow_fraction_above_cap;
  probe.validate();
  if (vocab_min_doc_fraction < 0.0 || vocab_min_doc_fraction > 1.0)
    throw_input("config: vocab_min_doc_fraction must sit in [0, 1]");
  if (assets_dir.empty()) assets_dir = "assets";
  if (out_dir.empty()) out_dir = "out";
}

ExperimentReport run_experiment(const ExperimentConfig& config,
                                const Corpus& corpus) {
  ExperimentReport report;
  report.config = config;
  report.config.normalize();
  const ExperimentConfig& cfg = report.config;

  std::string sk_path = cfg.assets_dir + "/stopwords_sklearn.txt";
  std::string nltk_path = cfg.assets_dir + "/stopwords_nltk.txt";
  StopWordSet stops = StopWordSet::load_files({sk_path, nltk_path});

  std::string syn_path = cfg.assets_dir + "/synonyms_en.tsv";
  SynonymLexicon lexicon;
  bool have_lexicon = std::filesystem::exists(syn_path);
  if (have_lexicon) lexicon = SynonymLexicon::load_file(syn_path);
  bool wants_synonyms =
      std::find(cfg.techniques.begin(), cfg.techniques.end(),
                Technique::SynonymReplacement) != cfg.techniques.end();
  if (wants_synonyms && lexicon.entries.empty())
    throw_input("synonym_replacement needs a synonym lexicon at " + syn_path);

  auto client = make_contextual_client_from_env();

  EvalContext ctx;
  ctx.stops = &stops;
  ctx.lexicon = have_lexicon ? &lexicon : nullptr;
  ctx.client = client.get();
  ctx.vocab_min_doc_fraction = cfg.vocab_min_doc_fraction;

  for (const std::string& path :
       {cfg.corpus_path, sk_path, nltk_path, syn_path}) {
    if (std::filesystem::exists(path))
      report.asset_hashes.push_back(basename_of(path) + " " +
                                    hex64(fnv1a(read_file(path))));
  }

  if (cfg.dump_features) {
    std::vector<TokenizedDoc> docs;
    docs.reserve(corpus.records.size());
    for (uint32_t i = 0; i < corpus.records.size(); ++i)
      docs.push_back(ctx.doc_for(corpus, i));
    Vocabulary vocab = fit_vocabulary(docs, cfg.vocab_min_doc_fraction);
    TfIdfModel tfidf = TfIdfModel::fit(docs, vocab);
    std::filesystem::create_directories(cfg.out_dir);
    write_file(cfg.out_dir + "/features.tsv",
               to_triplets(tfidf.transform_all(docs)));
  }

  for (CvssMetric task : cfg.tasks) {
    for (ModelKind model : cfg.models) {
      for (Technique technique : cfg.techniques) {
        for (uint64_t seed : cfg.seeds) {
          std::fprintf(stderr, "[svaug] task=%s model=%s technique=%s seed=%llu\n",
                       std::string(metric_name(task)).c_str(),
                       std::string(model_kind_name(model)).c_str(),
                       std::string(technique_name(technique)).c_str(),
                       static_cast<unsigned long long>(seed));
          AugmentationPlan plan;
          plan.technique = technique;
          plan.change_fraction = cfg.change_fraction;
          plan.pool_min_doc_fraction = cfg.pool_min_doc_fraction;
          plan.seed = seed;
          plan.allow_fraction_above_cap = cfg.allow_fraction_above_cap;
          ModelGrid grid =
              cfg.use_full_grid ? full_grid(model) : desk_grid(model);
          try {
            GridSearchOutcome outcome = run_grid(corpus, task, grid, plan, ctx);
            for (RoundResult& rr : outcome.rounds)
              report.rounds.push_back(SeedRoundResult{seed, std::move(rr)});
          } catch (const Error& e) {
            throw Error(e.code(),
                        "task=" + std::string(metric_name(task)) +
                            " technique=" + std::string(technique_name(technique)) +
                            " model=" + std::string(model_kind_name(model)) +
                            " seed=" + std::to_string(seed) + ": " + e.what());
          }
        }
      }
    }
  }

  if (std::find(cfg.techniques.begin(), cfg.techniques.end(),
                Technique::Combination) != cfg.techniques.end()) {
    for (CvssMetric task : cfg.tasks) {
      AugmentationPlan plan;
      plan.technique = Technique::Combination;
      plan.change_fraction = cfg.change_fraction;
      plan.pool_min_doc_fraction = cfg.pool_min_doc_fraction;
      plan.seed = cfg.seeds.front();
      plan.allow_fraction_above_cap = cfg.allow_fraction_above_cap;
      try {
        report.centroids.push_back(centroid_analysis(corpus, task, plan, ctx));
      } catch (const Error& e) {
        throw Error(e.code(), "centroid analysis, task=" +
                                  std::string(metric_name(task)) + ": " +
                                  e.what());
      }
    }
  }

  detail::finalize_report(report);
  return report;
}

namespace {

// Token-level alignment of the original and edited lists; 1:1 mismatches
// come back as one substitution edit. Positions refer to the original list
// (for inserts: the token the new word lands in front of).
std::vector<PreviewEdit> diff_tokens(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b,
                                     const std::string& sub_op) {
  size_t n = a.size(), m = b.size();
  std::vector<std::vector<uint32_t>> d(n + 1, std::vector<uint32_t>(m + 1, 0));
  for (size_t i = 0; i <= n; ++i) d[i][0] = static_cast<uint32_t>(i);
  for (size_t j = 0; j <= m; ++j) d[0][j] = static_cast<uint32_t>(j);
  for (size_t i = 1; i <= n; ++i) {
    for (size_t j = 1; j <= m; ++j) {
      uint32_t best = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      best = std::min(best, d[i - 1][j] + 1);
      best = std::min(best, d[i][j - 1] + 1);
      d[i][j] = best;
    }
  }
  std::vector<PreviewEdit> edits;
  size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 && a[i - 1] == b[j - 1] && d[i][j] == d[i - 1][j - 1]) {
      --i;
      --j;
    } else if (i > 0 && j > 0 && d[i][j] == d[i - 1][j - 1] + 1) {
      edits.push_back(PreviewEdit{sub_op, i - 1, a[i - 1], b[j - 1]});
      --i;
      --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      edits.push_back(PreviewEdit{"delete", i - 1, a[i - 1], ""});
      --i;
    } else {
      edits.push_back(PreviewEdit{"insert", i, "", b[j - 1]});
      --j;
    }
  }
  std::reverse(edits.begin(), edits.end());
  return edits;
}

}  // namespace

PreviewResult augment_preview(const std::string& text, Technique technique,
                              uint64_t seed, double change_fraction,
                              const FrequentWordPool& pool,
                              const SynonymLexicon& lexicon,
                              ContextualClient& client) {
  if (!technique_uses_text(technique))
    throw_input(std::string(technique_name(technique)) +
                " does not edit text; nothing to preview");

  PreviewResult res;
  res.original = text;
  std::vector<std::string> tokens = tokenize(text);
  if (tokens.empty()) throw_empty("preview: the text has no tokens");

  if (technique_is_contextual(technique)) {
    ContextualMode mode = technique == Technique::BackTranslation
                              ? ContextualMode::BackTranslate
                              : ContextualMode::Paraphrase;
    ContextualOutcome outcome = contextual_augment(text, mode, client);
    if (!outcome.text)
      throw_input("contextual augmentation failed: " + outcome.note);
    res.augmented = *outcome.text;
    res.note = "rewritten by " + client.name() +
               (outcome.note.empty() ? "" : "; " + outcome.note);
    res.edits.push_back(PreviewEdit{"rewrite", 0, text, res.augmented});
    return res;
  }

  size_t budget = change_budget(tokens.size(), change_fraction);
  Rng rng(mix_seed({seed, static_cast<uint64_t>(technique)}));
  std::vector<std::string> after;
  std::string sub_op = "substitute";

  switch (technique) {
    case Technique::Insertion:
      after = insert_words(tokens, pool, budget, rng);
      break;
    case Technique::Deletion: {
      if (tokens.size() < 2)
        throw_input("deletion would empty a 1-token text");
      if (budget >= tokens.size()) {
        budget = tokens.size() - 1;
        res.note = "budget clamped to keep one token";
      }
      after = delete_words(tokens, budget, rng);
      break;
    }
    case Technique::Substitution: {
      SubstituteResult r = substitute_words(tokens, pool, budget, rng);
      after = std::move(r.tokens);
      if (r.shortfall > 0)
        res.note = std::to_string(r.shortfall) +
                   " substitution(s) found no differing pool word";
      break;
    }
    case Technique::SynonymReplacement: {
      sub_op = "synonym";
      SubstituteResult r = synonym_replace(tokens, lexicon, budget, rng);
      after = std::move(r.tokens);
      if (r.replaced == 0)
        res.note = "no tokens have lexicon entries; text unchanged";
      else if (r.shortfall > 0)
        res.note = "only " + std::to_string(r.replaced) + " of " +
                   std::to_string(budget) + " tokens had lexicon entries";
      break;
    }
    case Technique::Combination: {
      CombineResult r = combine(tokens, pool, lexicon, budget, rng);
      after = std::move(r.tokens);
      res.note = "insertions=" + std::to_string(r.inserted) +
                 " deletions=" + std::to_string(r.deleted) +
                 " substitutions=" + std::to_string(r.substituted) +
                 " synonyms=" + std::to_string(r.synonyms);
      if (r.shortfall > 0)
        res.note += " shortfall=" + std::to_string(r.shortfall);
      break;
    }
    default:
      throw_internal("unhandled preview technique");
  }
  res.budget = budget;
  res.augmented = join_tokens(after);
  res.edits = diff_tokens(tokens, after, sub_op);
  return res;
}

int cmd_ingest(const std::vector<std::string>& feeds,
               const std::vector<std::string>& csvs, const std::string& out) {
  return guard([&]() {
    if (feeds.empty() && csvs.empty())
      throw_input("ingest needs at least one --feed or --csv input");
    if (out.empty()) throw_input("ingest needs --out");

    std::vector<RawRecord> raw;
    for (const std::string& path : feeds) {
      auto part = ingest_feed(read_file(path), FeedFormat::NvdJson11);
      raw.insert(raw.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }
    for (const std::string& path : csvs) {
      auto part = ingest_feed(read_file(path), FeedFormat::NativeCsv);
      raw.insert(raw.end(), std::make_move_iterator(part.begin()),
                 std::make_move_iterator(part.end()));
    }

    DropReport drop;
    Corpus corpus = build_corpus(raw, &drop);
    write_file(out, corpus_to_csv(corpus));

    std::printf("kept %zu records -> %s\n", drop.kept, out.c_str());
    std::printf(
        "dropped: rejected %zu, missing description %zu, missing cvss %zu, "
        "bad label %zu, bad date %zu, duplicates %zu\n",
        drop.rejected, drop.missing_description, drop.missing_cvss,
        drop.bad_label, drop.bad_date, drop.duplicate);
    size_t shown = 0;
    for (const std::string& w : drop.warnings) {
      if (shown == 20) {
        std::printf("  ... and %zu more warnings\n",
                    drop.warnings.size() - shown);
        break;
      }
      std::printf("  warning: %s\n", w.c_str());
      ++shown;
    }

    std::printf("\nclass distribution:\n");
    for (CvssMetric m : kAllMetrics) {
      auto dist = class_distribution(corpus, m);
      std::printf("%s\n", std::string(metric_display_name(m)).c_str());
      const auto& classes = metric_classes(m);
      for (size_t c = 0; c < kNumClasses; ++c) {
        size_t bar = static_cast<size_t>(std::lround(dist[c].fraction * 40.0));
        if (dist[c].count > 0 && bar == 0) bar = 1;
        std::printf("  %-18s %8llu  %5.1f%% %s\n",
                    std::string(classes[c]).c_str(),
                    static_cast<unsigned long long>(dist[c].count),
                    dist[c].fraction * 100.0, std::string(bar, '#').c_str());
      }
    }
    return 0;
  });
}

int cmd_run(const ExperimentConfig& config) {
  return guard([&]() {
    ExperimentConfig cfg = config;
    cfg.normalize();
    auto t0 = std::chrono::steady_clock::now();
    Corpus corpus = load_corpus_file(cfg.corpus_path, cfg.corpus_format);
    ExperimentReport report = run_experiment(cfg, corpus);
    double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    write_report_files(report, report.config.out_dir, elapsed);
    std::printf("wrote %s/{report.csv, report.md, plot_diff.tsv, "
                "results.json%s, run_meta.json}\n",
                report.config.out_dir.c_str(),
                report.centroids.empty() ? "" : ", centroids.csv");
    std::printf("%zu result rows; %zu comparisons vs none; %.1f s\n",
                report.rows.size(), report.comparisons.size(), elapsed);
    return 0;
  });
}

int cmd_augment_preview(const std::string& text, const std::string& technique,
                        uint64_t seed, double change_fraction,
                        const std::string& assets_dir,
                        const std::string& corpus_path,
                        bool allow_large_edits) {
  return guard([&]() {
    auto t = technique_from_name(technique);
    if (!t) throw_input("unknown technique: " + technique);
    AugmentationPlan plan;
    plan.technique = *t;
    plan.change_fraction = change_fraction;
    plan.seed = seed;
    plan.allow_fraction_above_cap = allow_large_edits;
    plan.validate();

    StopWordSet stops =
        StopWordSet::load_files({assets_dir + "/stopwords_sklearn.txt",
                                 assets_dir + "/stopwords_nltk.txt"});
    SynonymLexicon lexicon;
    std::string syn_path = assets_dir + "/synonyms_en.tsv";
    if (std::filesystem::exists(syn_path))
      lexicon = SynonymLexicon::load_file(syn_path);

    FrequentWordPool pool;
    if (!corpus_path.empty()) {
      FeedFormat format = corpus_path.size() > 5 &&
                                  corpus_path.rfind(".json") ==
                                      corpus_path.size() - 5
                              ? FeedFormat::NvdJson11
                              : FeedFormat::NativeCsv;
      Corpus corpus = load_corpus_file(corpus_path, format);
      std::vector<std::string> descriptions;
      descriptions.reserve(corpus.records.size());
      for (const auto& r : corpus.records)
        descriptions.push_back(r.description);
      pool = FrequentWordPool::build(descriptions, stops, 0.001);
      lexicon.set_corpus_frequencies(descriptions, stops);
    } else {
      std::string pf = assets_dir + "/preview_frequent_words.txt";
      if (std::filesystem::exists(pf)) pool = FrequentWordPool::from_file(pf);
    }

    auto client = make_contextual_client_from_env();
    if (technique_is_contextual(*t) && client->name() == "stub")
      std::fprintf(stderr,
                   "notice: AUGMENT_SERVICE_URL is not set; using the "
                   "offline stub\n");

    PreviewResult res = augment_preview(text, *t, seed, change_fraction, pool,
                                        lexicon, *client);
    std::printf("technique: %s (budget %zu)\n", technique.c_str(), res.budget);
    std::printf("original : %s\n", res.original.c_str());
    std::printf("augmented: %s\n", res.augmented.c_str());
    if (!res.edits.empty()) {
      std::printf("edits:\n");
      for (const PreviewEdit& e : res.edits) {
        if (e.op == "insert")
          std::printf("  insert     @%-3zu + \"%s\"\n", e.position,
                      e.after.c_str());
        else if (e.op == "delete")
          std::printf("  delete     @%-3zu - \"%s\"\n", e.position,
                      e.before.c_str());
        else if (e.op == "rewrite")
          std::printf("  rewrite    whole text\n");
        else
          std::printf("  %-10s @%-3zu \"%s\" -> \"%s\"\n", e.op.c_str(),
                      e.position, e.before.c_str(), e.after.c_str());
      }
    }
    if (!res.note.empty()) std::printf("note: %s\n", res.note.c_str());
    return 0;
  });
}

int cmd_report(const std::string& results_path, const std::string& out_dir) {
  return guard([&]() {
    if (results_path.empty()) throw_input("report needs --results");
    ExperimentReport report = report_from_results_json(read_file(results_path));
    write_report_files(report, out_dir, -1.0);
    std::printf("wrote %s/{report.csv, report.md, plot_diff.tsv, "
                "results.json%s}\n",
                out_dir.c_str(),
                report.centroids.empty() ? "" : ", centroids.csv");
    return 0;
  });
}

}  // namespace svaug
