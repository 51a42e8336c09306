#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <string>
#include <vector>

#include "svaug/augment.hpp"
#include "svaug/error.hpp"
#include "svaug/eval.hpp"
#include "svaug/features.hpp"
#include "svaug/harness.hpp"
#include "svaug/textprep.hpp"

namespace py = pybind11;

namespace {

svaug::ConfusionMatrix cm_from_rows(
    const std::vector<std::vector<uint64_t>>& rows) {
  if (rows.size() != svaug::kNumClasses)
    svaug::throw_input("confusion matrix must be 3x3");
  svaug::ConfusionMatrix cm;
  for (size_t t = 0; t < svaug::kNumClasses; ++t) {
    if (rows[t].size() != svaug::kNumClasses)
      svaug::throw_input("confusion matrix must be 3x3");
    for (size_t p = 0; p < svaug::kNumClasses; ++p) cm.m[t][p] = rows[t][p];
  }
  return cm;
}

py::dict preview_to_dict(const svaug::PreviewResult& res) {
  py::dict out;
  out["original"] = res.original;
  out["augmented"] = res.augmented;
  out["budget"] = res.budget;
  out["note"] = res.note;
  py::list edits;
  for (const auto& e : res.edits) {
    py::dict d;
    d["op"] = e.op;
    d["position"] = e.position;
    d["before"] = e.before;
    d["after"] = e.after;
    edits.append(std::move(d));
  }
  out["edits"] = std::move(edits);
  return out;
}

}  // namespace

PYBIND11_MODULE(_svaug, m) {
  m.doc() = "Vulnerability description augmentation and assessment core";

  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const svaug::Error& e) {
      if (e.code() == svaug::ErrorCode::Internal)
        PyErr_SetString(PyExc_RuntimeError, e.what());
      else
        PyErr_SetString(PyExc_ValueError, e.what());
    }
  });

  m.def(
      "porter_stem",
      [](const std::string& word) { return svaug::porter_stem(word); },
      py::arg("word"), "Porter-stem one lowercase word.");

  m.def(
      "tokenize",
      [](const std::string& text) { return svaug::tokenize(text); },
      py::arg("text"), "Whitespace token split.");

  m.def(
      "strip_token_punctuation",
      [](const std::string& token) {
        return std::string(svaug::strip_punctuation(token));
      },
      py::arg("token"), "Trim sentence punctuation from the token ends.");

  m.def(
      "preprocess",
      [](const std::string& text, const std::vector<std::string>& stop_words) {
        auto stops = svaug::StopWordSet::from_words(stop_words);
        svaug::TokenizedDoc doc = svaug::preprocess(text, stops);
        return py::make_tuple(doc.raw_tokens, doc.proc_tokens);
      },
      py::arg("text"), py::arg("stop_words") = std::vector<std::string>{},
      "Returns (raw_tokens, processed_tokens): stripped, lowercased, "
      "stop-filtered, stemmed.");

  m.def("change_budget", &svaug::change_budget, py::arg("token_count"),
        py::arg("change_fraction"),
        "Edit budget: max(1, floor(change_fraction * token_count)).");

  m.def(
      "severity_class",
      [](double base_score) {
        return std::string(svaug::metric_classes(
            svaug::CvssMetric::Severity)[svaug::severity_class_from_score(
            base_score)]);
      },
      py::arg("base_score"), "Severity band name for a CVSS v2 base score.");

  m.def(
      "multiclass_mcc",
      [](const std::vector<std::vector<uint64_t>>& cm) {
        return svaug::multiclass_mcc(cm_from_rows(cm));
      },
      py::arg("confusion_matrix"),
      "Multiclass MCC of a 3x3 [truth][prediction] matrix.");

  m.def(
      "macro_f1",
      [](const std::vector<std::vector<uint64_t>>& cm) {
        return svaug::macro_f1(cm_from_rows(cm));
      },
      py::arg("confusion_matrix"));

  m.def(
      "wilcoxon_signed_rank",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        svaug::WilcoxonResult r = svaug::wilcoxon_signed_rank(a, b);
        py::dict d;
        d["no_difference"] = r.no_difference;
        d["n_pairs"] = r.n_pairs;
        d["w_plus"] = r.w_plus;
        d["w_minus"] = r.w_minus;
        d["z"] = r.z;
        d["p_two_sided"] = r.p_two_sided;
        d["effect_size_r"] = r.effect_size_r;
        d["magnitude"] = r.magnitude;
        d["significant"] = r.significant;
        return d;
      },
      py::arg("a"), py::arg("b"),
      "Paired signed-rank test of a vs b (z > 0 when a tends above b).");

  m.def(
      "tfidf",
      [](const std::vector<std::string>& docs,
         const std::vector<std::string>& stop_words, double min_doc_fraction) {
        auto stops = svaug::StopWordSet::from_words(stop_words);
        std::vector<svaug::TokenizedDoc> tdocs;
        tdocs.reserve(docs.size());
        svaug::StemCache cache;
        for (const auto& d : docs)
          tdocs.push_back(svaug::preprocess(d, stops, &cache));
        auto vocab = svaug::fit_vocabulary(tdocs, min_doc_fraction);
        auto model = svaug::TfIdfModel::fit(tdocs, vocab);
        auto rows = model.transform_all(tdocs);
        py::dict out;
        out["terms"] = vocab.terms;
        py::list prows;
        for (const auto& row : rows) {
          py::list entries;
          for (const auto& [idx, w] : row.entries)
            entries.append(py::make_tuple(idx, w));
          prows.append(std::move(entries));
        }
        out["rows"] = std::move(prows);
        return out;
      },
      py::arg("docs"), py::arg("stop_words") = std::vector<std::string>{},
      py::arg("min_doc_fraction") = 0.0,
      "Fits the tf-idf pipeline on the documents; returns vocabulary terms "
      "and sparse (index, weight) rows.");

  m.def(
      "augment_preview",
      [](const std::string& text, const std::string& technique, uint64_t seed,
         double change_fraction, const std::vector<std::string>& pool_words,
         const std::map<std::string, std::vector<std::string>>& synonyms) {
        auto t = svaug::technique_from_name(technique);
        if (!t) svaug::throw_input("unknown technique: " + technique);
        svaug::FrequentWordPool pool;
        for (const auto& w : pool_words) {
          pool.words.push_back(w);
          pool.weights.push_back(1);
        }
        svaug::SynonymLexicon lexicon;
        for (const auto& [word, syns] : synonyms)
          lexicon.entries[word] = syns;
        svaug::StubContextualClient stub;
        return preview_to_dict(svaug::augment_preview(
            text, *t, seed, change_fraction, pool, lexicon, stub));
      },
      py::arg("text"), py::arg("technique"), py::arg("seed") = 1,
      py::arg("change_fraction") = 0.2,
      py::arg("pool_words") = std::vector<std::string>{},
      py::arg("synonyms") = std::map<std::string, std::vector<std::string>>{},
      "One annotated augmentation of a single text (contextual techniques "
      "use the offline stub).");

  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        auto cfg = svaug::ExperimentConfig::from_json(config_json);
        cfg.normalize();
        svaug::Corpus corpus =
            svaug::load_corpus_file(cfg.corpus_path, cfg.corpus_format);
        svaug::ExperimentReport report = svaug::run_experiment(cfg, corpus);
        py::dict out;
        out["csv"] = report.to_csv();
        out["markdown"] = report.to_markdown();
        out["results_json"] = report.results_json();
        return out;
      },
      py::arg("config_json"),
      "Runs the full pipeline from a JSON config string; returns the report "
      "text blobs without writing files.");
}
