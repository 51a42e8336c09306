#include "svaug/eval.hpp"

#include <algorithm>
#include <cmath>

#include "svaug/error.hpp"

namespace svaug {

TimeFolds split_time_folds(const Corpus& corpus) {
  size_t n = corpus.records.size();
  if (n < 5)
    throw_empty("time-based splitting needs at least 5 records, got " +
                std::to_string(n));
  for (size_t i = 1; i < n; ++i) {
    const auto& a = corpus.records[i - 1];
    const auto& b = corpus.records[i];
    if (a.published > b.published ||
        (a.published == b.published && a.id > b.id))
      throw_input("corpus is not sorted by publication time");
  }
  TimeFolds out;
  size_t base = n / 5, rem = n % 5;
  uint32_t begin = 0;
  for (size_t f = 0; f < 5; ++f) {
    uint32_t size = static_cast<uint32_t>(base + (f < rem ? 1 : 0));
    out.folds[f] = FoldRange{begin, begin + size};
    begin += size;
  }
  return out;
}

RoundSpec round_spec(const TimeFolds& folds, int round) {
  if (round < 1 || round > 3) throw_input("round must be 1, 2 or 3");
  RoundSpec spec;
  spec.round = round;
  spec.train = FoldRange{folds.folds[0].begin,
                         folds.folds[static_cast<size_t>(round - 1)].end};
  spec.validation = folds.folds[static_cast<size_t>(round)];
  spec.test = folds.folds[static_cast<size_t>(round + 1)];
  return spec;
}

size_t ModelGrid::size() const {
  return kind == ModelKind::RandomForest ? forest_points.size()
                                         : logreg_points.size();
}

std::string ModelGrid::point_summary(size_t i) const {
  return kind == ModelKind::RandomForest ? forest_points[i].summary()
                                         : logreg_points[i].summary();
}

ModelGrid desk_grid(ModelKind kind) {
  ModelGrid grid;
  grid.kind = kind;
  if (kind == ModelKind::RandomForest) {
    ForestParams p;
    p.n_trees = 50;
    p.max_depth = 7;
    p.max_leaf_nodes = 100;
    grid.forest_points.push_back(p);
  } else {
    LogRegParams p;
    grid.logreg_points.push_back(p);
  }
  return grid;
}

ModelGrid full_grid(ModelKind kind) {
  ModelGrid grid;
  grid.kind = kind;
  if (kind == ModelKind::RandomForest) {
    for (uint32_t trees : {100u, 300u, 500u})
      for (uint32_t depth : {3u, 5u, 7u, 9u})
        for (uint32_t leaves : {100u, 200u, 300u}) {
          ForestParams p;
          p.n_trees = trees;
          p.max_depth = depth;
          p.max_leaf_nodes = leaves;
          grid.forest_points.push_back(p);
        }
  } else {
    for (double l2 : {1e-2, 1e-4}) {
      LogRegParams p;
      p.l2 = l2;
      p.epochs = 60;
      grid.logreg_points.push_back(p);
    }
  }
  return grid;
}

size_t select_grid_point(const std::vector<double>& mean_validation_mcc) {
  if (mean_validation_mcc.empty()) throw_input("empty grid");
  size_t best = 0;
  for (size_t i = 1; i < mean_validation_mcc.size(); ++i)
    if (mean_validation_mcc[i] > mean_validation_mcc[best]) best = i;
  return best;
}

const TokenizedDoc& EvalContext::doc_for(const Corpus& corpus,
                                         uint32_t index) const {
  if (doc_cache.size() != corpus.records.size()) {
    doc_cache.assign(corpus.records.size(), TokenizedDoc{});
    doc_cached.assign(corpus.records.size(), false);
  }
  if (!doc_cached[index]) {
    doc_cache[index] =
        preprocess(corpus.records[index].description, *stops, &stem_cache);
    doc_cached[index] = true;
  }
  return doc_cache[index];
}

namespace {

std::vector<std::string> slice_descriptions(const Corpus& corpus,
                                            FoldRange range) {
  std::vector<std::string> out;
  out.reserve(range.size());
  for (uint32_t i = range.begin; i < range.end; ++i)
    out.push_back(corpus.records[i].description);
  return out;
}

std::vector<VulnRecord> slice_records(const Corpus& corpus, FoldRange range) {
  return std::vector<VulnRecord>(
      corpus.records.begin() + range.begin,
      corpus.records.begin() + range.end);
}

struct RoundData {
  BalanceResult balance;
  std::vector<SparseVector> x_train, x_val, x_test;
  std::vector<uint32_t> y_train, y_val, y_test;
  TfIdfModel tfidf;
  std::vector<std::string> flags;
};

// Balancing, preprocessing and feature extraction for one round; shared by
// every grid point. Only training folds are balanced; validation and test
// rows are transformed with the training-fitted tf-idf.
RoundData prepare_round(const Corpus& corpus, CvssMetric task,
                        const RoundSpec& spec, const AugmentationPlan& plan,
                        const EvalContext& ctx, uint64_t round_seed) {
  RoundData data;

  std::vector<VulnRecord> train = slice_records(corpus, spec.train);
  AugmentResources res;
  FrequentWordPool pool;
  SynonymLexicon lexicon;
  if (technique_uses_text(plan.technique) &&
      !technique_is_contextual(plan.technique)) {
    auto descriptions = slice_descriptions(corpus, spec.train);
    pool = FrequentWordPool::build(descriptions, *ctx.stops,
                                   plan.pool_min_doc_fraction);
    if (ctx.lexicon) {
      lexicon = *ctx.lexicon;
      lexicon.set_corpus_frequencies(descriptions, *ctx.stops);
    }
    res.pool = &pool;
    res.lexicon = &lexicon;
  }
  res.client = ctx.client;

  AugmentationPlan round_plan = plan;
  round_plan.seed = round_seed;
  data.balance = balance_training_set(train, task, round_plan, res);

  std::vector<TokenizedDoc> train_docs;
  train_docs.reserve(data.balance.samples.size());
  for (const auto& sample : data.balance.samples) {
    if (!sample.augmented() && sample.corpus_index >= 0) {
      train_docs.push_back(ctx.doc_for(
          corpus, spec.train.begin + static_cast<uint32_t>(sample.corpus_index)));
    } else {
      train_docs.push_back(
          preprocess(sample.description, *ctx.stops, &ctx.stem_cache));
    }
    data.y_train.push_back(sample.labels[static_cast<size_t>(task)]);
  }

  Vocabulary vocab = fit_vocabulary(train_docs, ctx.vocab_min_doc_fraction);
  data.tfidf = TfIdfModel::fit(train_docs, vocab);
  data.x_train = data.tfidf.transform_all(train_docs);

  auto transform_range = [&](FoldRange range, std::vector<SparseVector>& x,
                             std::vector<uint32_t>& y) {
    x.reserve(range.size());
    y.reserve(range.size());
    for (uint32_t i = range.begin; i < range.end; ++i) {
      x.push_back(data.tfidf.transform(ctx.doc_for(corpus, i)));
      y.push_back(corpus.records[i].labels[static_cast<size_t>(task)]);
    }
  };
  transform_range(spec.validation, data.x_val, data.y_val);
  transform_range(spec.test, data.x_test, data.y_test);

  auto flag_missing = [&](const std::vector<uint32_t>& y, const char* side) {
    std::array<bool, kNumClasses> seen{};
    for (uint32_t v : y) seen[v] = true;
    for (size_t c = 0; c < kNumClasses; ++c)
      if (!seen[c])
        data.flags.push_back(std::string(side) + "-missing-class:" +
                             std::string(metric_classes(task)[c]));
  };
  flag_missing(data.y_val, "validation");
  flag_missing(data.y_test, "test");
  for (const auto& d : data.balance.diagnostics)
    data.flags.push_back("balance: " + d);
  return data;
}

TrainedModel train_point(const ModelGrid& grid, size_t point,
                         const RoundData& data, CvssMetric task,
                         uint64_t model_seed) {
  std::vector<std::string> class_names;
  for (auto name : metric_classes(task)) class_names.emplace_back(name);
  if (grid.kind == ModelKind::RandomForest) {
    ForestParams params = grid.forest_points[point];
    params.seed = model_seed;
    return train_forest(data.x_train, data.y_train, kNumClasses, params,
                        std::move(class_names),
                        data.tfidf.vocab.content_hash());
  }
  LogRegParams params = grid.logreg_points[point];
  params.seed = model_seed;
  return train_logreg(data.x_train, data.y_train, kNumClasses, params,
                      std::move(class_names), data.tfidf.vocab.content_hash());
}

std::vector<uint32_t> predict_all(const TrainedModel& model,
                                  const std::vector<SparseVector>& X) {
  std::vector<uint32_t> out;
  out.reserve(X.size());
  for (const auto& x : X) out.push_back(model.predict(x));
  return out;
}

}  // namespace

GridSearchOutcome run_grid(const Corpus& corpus, CvssMetric task,
                           const ModelGrid& grid, const AugmentationPlan& plan,
                           const EvalContext& ctx) {
  if (grid.size() == 0) throw_input("hyperparameter grid is empty");
  if (!ctx.stops) throw_internal("run_grid needs a stop-word set");
  plan.validate();

  TimeFolds folds = split_time_folds(corpus);

  struct PointRound {
    double val_mcc = 0.0, test_mcc = 0.0, test_f1 = 0.0;
    ConfusionMatrix val_cm, test_cm;
  };
  std::vector<std::vector<PointRound>> results(
      grid.size(), std::vector<PointRound>(3));
  std::array<std::vector<std::string>, 3> round_flags;

  for (int round = 1; round <= 3; ++round) {
    RoundSpec spec = round_spec(folds, round);
    uint64_t round_seed = mix_seed(
        {plan.seed, static_cast<uint64_t>(task),
         static_cast<uint64_t>(plan.technique), static_cast<uint64_t>(round)});
    RoundData data = prepare_round(corpus, task, spec, plan, ctx, round_seed);
    round_flags[static_cast<size_t>(round - 1)] = data.flags;

    for (size_t point = 0; point < grid.size(); ++point) {
      uint64_t model_seed = mix_seed(
          {plan.seed, static_cast<uint64_t>(task),
           static_cast<uint64_t>(plan.technique), static_cast<uint64_t>(point),
           static_cast<uint64_t>(round), 0x0de1u});
      TrainedModel model = train_point(grid, point, data, task, model_seed);

      PointRound& pr = results[point][static_cast<size_t>(round - 1)];
      pr.val_cm =
          ConfusionMatrix::from_predictions(data.y_val,
                                            predict_all(model, data.x_val));
      pr.test_cm =
          ConfusionMatrix::from_predictions(data.y_test,
                                            predict_all(model, data.x_test));
      pr.val_mcc = multiclass_mcc(pr.val_cm);
      pr.test_mcc = multiclass_mcc(pr.test_cm);
      pr.test_f1 = macro_f1(pr.test_cm);
    }
  }

  std::vector<double> mean_val(grid.size(), 0.0);
  for (size_t point = 0; point < grid.size(); ++point) {
    for (int r = 0; r < 3; ++r) mean_val[point] += results[point][r].val_mcc;
    mean_val[point] /= 3.0;
  }
  size_t selected = select_grid_point(mean_val);

  GridSearchOutcome out;
  out.selected_index = selected;
  out.selected_mean_validation_mcc = mean_val[selected];
  for (int r = 0; r < 3; ++r) {
    RoundResult rr;
    rr.task = task;
    rr.model = grid.kind;
    rr.technique = plan.technique;
    rr.hyperparams = grid.point_summary(selected);
    rr.round = r + 1;
    rr.validation_mcc = results[selected][r].val_mcc;
    rr.test_mcc = results[selected][r].test_mcc;
    rr.test_macro_f1 = results[selected][r].test_f1;
    rr.validation_cm = results[selected][r].val_cm;
    rr.test_cm = results[selected][r].test_cm;
    rr.flags = round_flags[static_cast<size_t>(r)];
    out.rounds.push_back(std::move(rr));
  }
  return out;
}

CentroidStats centroid_similarity(const std::vector<SparseVector>& augmented,
                                  const std::vector<uint32_t>& augmented_class,
                                  const std::vector<SparseVector>& originals,
                                  const std::vector<uint32_t>& original_class) {
  if (augmented.size() != augmented_class.size() ||
      originals.size() != original_class.size())
    throw_input("centroid: vector/label count mismatch");
  if (originals.empty()) throw_empty("centroid: no original vectors");

  uint32_t dims = originals[0].dims;
  std::array<std::vector<double>, kNumClasses> centroid;
  std::array<uint64_t, kNumClasses> counts{};
  for (auto& c : centroid) c.assign(dims, 0.0);
  for (size_t i = 0; i < originals.size(); ++i) {
    if (originals[i].dims != dims) throw_input("centroid: dims mismatch");
    auto& c = centroid[original_class[i]];
    for (const auto& [idx, w] : originals[i].entries) c[idx] += w;
    ++counts[original_class[i]];
  }
  std::array<SparseVector, kNumClasses> centroid_sparse;
  for (size_t k = 0; k < kNumClasses; ++k) {
    centroid_sparse[k].dims = dims;
    if (counts[k] == 0) continue;
    for (uint32_t d = 0; d < dims; ++d) {
      if (centroid[k][d] != 0.0)
        centroid_sparse[k].entries.emplace_back(
            d, centroid[k][d] / static_cast<double>(counts[k]));
    }
  }

  CentroidStats stats;
  std::array<double, kNumClasses> same_sum{};
  std::array<double, kNumClasses> other_sum{};
  for (size_t i = 0; i < augmented.size(); ++i) {
    uint32_t cls = augmented_class[i];
    ++stats.n_augmented[cls];
    if (counts[cls] > 0)
      same_sum[cls] += cosine(augmented[i], centroid_sparse[cls]);
    double best_other = 0.0;
    bool any = false;
    for (uint32_t k = 0; k < kNumClasses; ++k) {
      if (k == cls || counts[k] == 0) continue;
      double sim = cosine(augmented[i], centroid_sparse[k]);
      if (!any || sim > best_other) {
        best_other = sim;
        any = true;
      }
    }
    if (any) other_sum[cls] += best_other;
  }

  double task_same_sum = 0.0, task_other_sum = 0.0;
  uint64_t total = 0;
  for (size_t k = 0; k < kNumClasses; ++k) {
    if (stats.n_augmented[k] == 0) {
      stats.excluded[k] = true;
      continue;
    }
    double n = static_cast<double>(stats.n_augmented[k]);
    stats.same_mean[k] = same_sum[k] / n;
    stats.other_mean[k] = other_sum[k] / n;
    task_same_sum += same_sum[k];
    task_other_sum += other_sum[k];
    total += stats.n_augmented[k];
  }
  if (total > 0) {
    stats.task_same = task_same_sum / static_cast<double>(total);
    stats.task_other = task_other_sum / static_cast<double>(total);
  }
  return stats;
}

TaskCentroidReport centroid_analysis(const Corpus& corpus, CvssMetric task,
                                     const AugmentationPlan& plan,
                                     const EvalContext& ctx) {
  TimeFolds folds = split_time_folds(corpus);
  TaskCentroidReport report;
  report.task = task;
  double same_sum = 0.0, other_sum = 0.0;
  uint64_t weight = 0;

  for (int round = 1; round <= 3; ++round) {
    RoundSpec spec = round_spec(folds, round);
    uint64_t round_seed = mix_seed(
        {plan.seed, static_cast<uint64_t>(task),
         static_cast<uint64_t>(plan.technique), static_cast<uint64_t>(round)});
    RoundData data = prepare_round(corpus, task, spec, plan, ctx, round_seed);

    std::vector<SparseVector> aug_x, orig_x;
    std::vector<uint32_t> aug_y, orig_y;
    for (size_t i = 0; i < data.balance.samples.size(); ++i) {
      if (data.balance.samples[i].augmented()) {
        aug_x.push_back(data.x_train[i]);
        aug_y.push_back(data.y_train[i]);
      } else {
        orig_x.push_back(data.x_train[i]);
        orig_y.push_back(data.y_train[i]);
      }
    }
    if (aug_x.empty() || orig_x.empty()) continue;
    CentroidStats stats = centroid_similarity(aug_x, aug_y, orig_x, orig_y);
    uint64_t n = 0;
    for (auto c : stats.n_augmented) n += c;
    same_sum += stats.task_same * static_cast<double>(n);
    other_sum += stats.task_other * static_cast<double>(n);
    weight += n;
  }
  if (weight > 0) {
    report.same = same_sum / static_cast<double>(weight);
    report.other = other_sum / static_cast<double>(weight);
    report.n_augmented = weight;
  }
  return report;
}

}  // namespace svaug
