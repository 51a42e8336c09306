#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "report_internal.hpp"
#include "svaug/error.hpp"
#include "svaug/harness.hpp"
#include "svaug/rng.hpp"

namespace svaug {

using json = nlohmann::json;

namespace {

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

std::string num6(double v) { return fmt("%.6f", v); }
std::string sig6(double v) { return fmt("%.6g", v); }
std::string pct1(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%+.1f%%", v);
  return buf;
}

std::string row_key(CvssMetric task, ModelKind model, Technique technique) {
  return std::string(metric_name(task)) + "|" +
         std::string(model_kind_name(model)) + "|" +
         std::string(technique_name(technique));
}

struct RowAccum {
  double val = 0.0, test = 0.0, f1 = 0.0;
  size_t n = 0;
};

// Per (task, model, technique): means over seeds x rounds.
std::map<std::string, RowAccum> accumulate_rows(const ExperimentReport& r) {
  std::map<std::string, RowAccum> acc;
  for (const auto& sr : r.rounds) {
    RowAccum& a = acc[row_key(sr.result.task, sr.result.model,
                              sr.result.technique)];
    a.val += sr.result.validation_mcc;
    a.test += sr.result.test_mcc;
    a.f1 += sr.result.test_macro_f1;
    ++a.n;
  }
  return acc;
}

const ReportRow* find_row(const ExperimentReport& r, CvssMetric task,
                          ModelKind model, Technique technique) {
  for (const auto& row : r.rows)
    if (row.task == task && row.model == model && row.technique == technique)
      return &row;
  return nullptr;
}

const ComparisonRow* find_comparison(const ExperimentReport& r,
                                     ModelKind model, Technique technique) {
  for (const auto& c : r.comparisons)
    if (c.model == model && c.technique == technique) return &c;
  return nullptr;
}

// 100 * (value - baseline) / |baseline|; nullopt when the baseline vanishes.
std::optional<double> pct_diff(double value, double baseline) {
  if (std::fabs(baseline) < 1e-12) return std::nullopt;
  return 100.0 * (value - baseline) / std::fabs(baseline);
}

json cm_to_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (size_t t = 0; t < kNumClasses; ++t) {
    json row = json::array();
    for (size_t p = 0; p < kNumClasses; ++p) row.push_back(cm.m[t][p]);
    rows.push_back(std::move(row));
  }
  return rows;
}

ConfusionMatrix cm_from_json(const json& rows) {
  ConfusionMatrix cm;
  if (!rows.is_array() || rows.size() != kNumClasses)
    throw_input("results: confusion matrix must be 3x3");
  for (size_t t = 0; t < kNumClasses; ++t) {
    if (!rows[t].is_array() || rows[t].size() != kNumClasses)
      throw_input("results: confusion matrix must be 3x3");
    for (size_t p = 0; p < kNumClasses; ++p)
      cm.m[t][p] = rows[t][p].get<uint64_t>();
  }
  return cm;
}

}  // namespace

namespace detail {

void finalize_report(ExperimentReport& report) {
  const ExperimentConfig& cfg = report.config;
  report.rows.clear();
  report.comparisons.clear();

  auto acc = accumulate_rows(report);
  for (CvssMetric task : cfg.tasks) {
    for (ModelKind model : cfg.models) {
      for (Technique technique : cfg.techniques) {
        auto it = acc.find(row_key(task, model, technique));
        if (it == acc.end() || it->second.n == 0) continue;
        ReportRow row;
        row.task = task;
        row.model = model;
        row.technique = technique;
        double n = static_cast<double>(it->second.n);
        row.mean_validation_mcc = it->second.val / n;
        row.mean_test_mcc = it->second.test / n;
        row.mean_test_f1 = it->second.f1 / n;
        report.rows.push_back(row);
      }
    }
  }

  // Test-MCC pairs keyed by (task, round, seed), technique vs the None
  // baseline, one comparison per (model, technique).
  std::map<std::string, double> mcc;
  for (const auto& sr : report.rounds)
    mcc[row_key(sr.result.task, sr.result.model, sr.result.technique) + "|" +
        std::to_string(sr.result.round) + "|" + std::to_string(sr.seed)] =
        sr.result.test_mcc;

  for (ModelKind model : cfg.models) {
    for (Technique technique : cfg.techniques) {
      if (technique == Technique::None) continue;
      std::vector<double> a, b;
      for (CvssMetric task : cfg.tasks) {
        for (int round = 1; round <= 3; ++round) {
          for (uint64_t seed : cfg.seeds) {
            std::string suffix =
                "|" + std::to_string(round) + "|" + std::to_string(seed);
            auto ta = mcc.find(row_key(task, model, technique) + suffix);
            auto tb = mcc.find(row_key(task, model, Technique::None) + suffix);
            if (ta == mcc.end() || tb == mcc.end()) continue;
            a.push_back(ta->second);
            b.push_back(tb->second);
          }
        }
      }
      if (a.empty()) continue;
      ComparisonRow cmp;
      cmp.model = model;
      cmp.technique = technique;
      if (a.size() < 5) {
        cmp.note = "only " + std::to_string(a.size()) +
                   " pairs; the signed-rank test needs at least 5";
      } else {
        try {
          cmp.stats = wilcoxon_signed_rank(a, b);
          cmp.computed = true;
          if (cmp.stats.no_difference)
            cmp.note = "every pair tied; no difference to test";
        } catch (const Error& e) {
          cmp.note = e.what();
        }
      }
      report.comparisons.push_back(std::move(cmp));
    }
  }
}

}  // namespace detail

std::string ExperimentReport::to_csv() const {
  std::string out =
      "task,model,technique,mean_validation_mcc,mean_test_mcc,"
      "mean_test_macro_f1,wilcoxon_p,wilcoxon_z,effect_r,magnitude,"
      "significant\n";
  for (const auto& row : rows) {
    out += std::string(metric_name(row.task)) + "," +
           std::string(model_kind_name(row.model)) + "," +
           std::string(technique_name(row.technique)) + "," +
           num6(row.mean_validation_mcc) + "," + num6(row.mean_test_mcc) +
           "," + num6(row.mean_test_f1) + ",";
    const ComparisonRow* cmp =
        row.technique == Technique::None
            ? nullptr
            : find_comparison(*this, row.model, row.technique);
    if (cmp && cmp->computed && !cmp->stats.no_difference) {
      out += sig6(cmp->stats.p_two_sided) + "," + sig6(cmp->stats.z) + "," +
             sig6(cmp->stats.effect_size_r) + "," + cmp->stats.magnitude +
             "," + (cmp->stats.significant ? "yes" : "no");
    } else if (cmp && cmp->computed) {
      out += "1,0,0," + cmp->stats.magnitude + ",no";
    } else {
      out += ",,,,";
    }
    out += "\n";
  }
  return out;
}

std::string ExperimentReport::to_plot_tsv() const {
  std::string out = "model\ttechnique\ttask\ttest_mcc_delta_pct\n";
  for (ModelKind model : config.models) {
    for (Technique technique : config.techniques) {
      if (technique == Technique::None) continue;
      for (CvssMetric task : config.tasks) {
        const ReportRow* t = find_row(*this, task, model, technique);
        const ReportRow* base = find_row(*this, task, model, Technique::None);
        if (!t || !base) continue;
        auto pct = pct_diff(t->mean_test_mcc, base->mean_test_mcc);
        out += std::string(model_kind_name(model)) + "\t" +
               std::string(technique_name(technique)) + "\t" +
               std::string(metric_name(task)) + "\t" +
               (pct ? fmt("%.3f", *pct) : "") + "\n";
      }
    }
  }
  return out;
}

std::string ExperimentReport::centroids_csv() const {
  std::string out =
      "task,same_class_mean_cosine,other_class_max_mean_cosine,"
      "n_augmented\n";
  for (const auto& c : centroids) {
    out += std::string(metric_name(c.task)) + "," + num6(c.same) + "," +
           num6(c.other) + "," + std::to_string(c.n_augmented) + "\n";
  }
  return out;
}

std::string ExperimentReport::to_markdown() const {
  std::string out = "# Vulnerability assessment augmentation report\n\n";
  out += "- corpus: `" + config.corpus_path + "`\n";
  out += "- seeds:";
  for (size_t i = 0; i < config.seeds.size(); ++i)
    out += (i ? ", " : " ") + std::to_string(config.seeds[i]);
  out += "\n";
  out += std::string("- hyperparameter grid: ") +
         (config.use_full_grid ? "full" : "compact") + "\n";
  out += "- change fraction: " + sig6(config.change_fraction) + "\n";
  out += "- significance pairing unit: " + std::string(detail::kPairingUnit) +
         "\n\n";

  auto task_header = [&]() {
    std::string h = "| technique |";
    for (CvssMetric task : config.tasks)
      h += " " + std::string(metric_name(task)) + " |";
    h += " avg |\n|---|";
    for (size_t i = 0; i <= config.tasks.size(); ++i) h += "---:|";
    h += "\n";
    return h;
  };

  for (ModelKind model : config.models) {
    out += "## " + std::string(model_kind_name(model)) + "\n\n";

    for (int which = 0; which < 2; ++which) {
      out += which == 0 ? "### Mean test MCC\n\n"
                        : "### Mean test macro-F1\n\n";
      out += task_header();
      for (Technique technique : config.techniques) {
        std::string line = "| " + std::string(technique_name(technique)) + " |";
        double sum = 0.0;
        size_t n = 0;
        bool any = false;
        for (CvssMetric task : config.tasks) {
          const ReportRow* row = find_row(*this, task, model, technique);
          if (!row) {
            line += " |";
            continue;
          }
          any = true;
          double v = which == 0 ? row->mean_test_mcc : row->mean_test_f1;
          sum += v;
          ++n;
          line += " " + num6(v) + " |";
        }
        if (!any) continue;
        line += " " + num6(sum / static_cast<double>(n)) + " |\n";
        out += line;
      }
      out += "\n";
    }

    bool any_cmp = false;
    for (const auto& c : comparisons) any_cmp |= c.model == model;
    if (any_cmp) {
      out += "### Signed-rank test vs none (test MCC)\n\n";
      out += "| technique | pairs | w+ | w- | z | p | effect r | magnitude |"
             " significant | note |\n";
      out += "|---|---:|---:|---:|---:|---:|---:|---|---|---|\n";
      for (const auto& c : comparisons) {
        if (c.model != model) continue;
        out += "| " + std::string(technique_name(c.technique)) + " | ";
        if (c.computed && !c.stats.no_difference) {
          out += std::to_string(c.stats.n_pairs) + " | " +
                 sig6(c.stats.w_plus) + " | " + sig6(c.stats.w_minus) +
                 " | " + sig6(c.stats.z) + " | " + sig6(c.stats.p_two_sided) +
                 " | " + sig6(c.stats.effect_size_r) + " | " +
                 c.stats.magnitude + " | " +
                 (c.stats.significant ? "yes" : "no") + " | " + c.note + " |\n";
        } else {
          out += "| | | | | | | | " + c.note + " |\n";
        }
      }
      out += "\n";
    }

    bool wrote_pct_header = false;
    for (Technique technique : config.techniques) {
      if (technique == Technique::None) continue;
      std::string line = "| " + std::string(technique_name(technique)) + " |";
      double sum = 0.0;
      size_t n = 0;
      bool any = false;
      for (CvssMetric task : config.tasks) {
        const ReportRow* t = find_row(*this, task, model, technique);
        const ReportRow* base = find_row(*this, task, model, Technique::None);
        std::optional<double> pct;
        if (t && base) pct = pct_diff(t->mean_test_mcc, base->mean_test_mcc);
        if (pct) {
          any = true;
          sum += *pct;
          ++n;
          line += " " + pct1(*pct) + " |";
        } else {
          line += " |";
        }
      }
      if (!any) continue;
      if (!wrote_pct_header) {
        out += "### Mean test MCC, percentage difference vs none\n\n";
        out += task_header();
        wrote_pct_header = true;
      }
      line += " " + pct1(sum / static_cast<double>(n)) + " |\n";
      out += line;
    }
    if (wrote_pct_header)
      out += "\nEmpty cells: baseline mean MCC too close to zero for a "
             "percentage.\n\n";
  }

  // Best improvement per task, averaged over the model families present.
  {
    std::vector<std::pair<CvssMetric, double>> best_rows;
    for (CvssMetric task : config.tasks) {
      double sum = 0.0;
      size_t families = 0;
      for (ModelKind model : config.models) {
        const ReportRow* base = find_row(*this, task, model, Technique::None);
        if (!base) continue;
        std::optional<double> best;
        for (Technique technique : config.techniques) {
          if (technique == Technique::None) continue;
          const ReportRow* t = find_row(*this, task, model, technique);
          if (!t) continue;
          auto pct = pct_diff(t->mean_test_mcc, base->mean_test_mcc);
          if (pct && (!best || *pct > *best)) best = *pct;
        }
        if (best) {
          sum += *best;
          ++families;
        }
      }
      if (families > 0)
        best_rows.emplace_back(task, sum / static_cast<double>(families));
    }
    if (!best_rows.empty()) {
      out += "## Best improvement over none\n\n";
      out += "Averaged over " + std::to_string(config.models.size()) +
             " model famil" + (config.models.size() == 1 ? "y" : "ies") +
             ", best technique per task by mean test MCC.\n\n";
      out += "| task | best improvement |\n|---|---:|\n";
      double total = 0.0;
      for (const auto& [task, v] : best_rows) {
        out += "| " + std::string(metric_name(task)) + " | " + pct1(v) +
               " |\n";
        total += v;
      }
      out += "| all tasks | " +
             pct1(total / static_cast<double>(best_rows.size())) + " |\n\n";
    }
  }

  if (!centroids.empty()) {
    out += "## Centroid similarity of combination-augmented text\n\n";
    out += "Cosine similarity of each augmented training vector to the "
           "original per-class centroids, averaged over rounds.\n\n";
    out += "| task | same class | strongest other class | augmented samples "
           "|\n|---|---:|---:|---:|\n";
    double same_sum = 0.0, other_sum = 0.0;
    uint64_t weight = 0;
    for (const auto& c : centroids) {
      out += "| " + std::string(metric_name(c.task)) + " | " + num6(c.same) +
             " | " + num6(c.other) + " | " + std::to_string(c.n_augmented) +
             " |\n";
      same_sum += c.same * static_cast<double>(c.n_augmented);
      other_sum += c.other * static_cast<double>(c.n_augmented);
      weight += c.n_augmented;
    }
    if (weight > 0) {
      out += "| average | " + num6(same_sum / static_cast<double>(weight)) +
             " | " + num6(other_sum / static_cast<double>(weight)) + " | " +
             std::to_string(weight) + " |\n";
    }
    out += "\n";
  }

  // Distinct per-round flags with occurrence counts.
  std::map<std::string, size_t> flag_counts;
  for (const auto& sr : rounds)
    for (const auto& f : sr.result.flags) ++flag_counts[f];
  if (!flag_counts.empty()) {
    out += "## Diagnostics\n\n";
    for (const auto& [flag, count] : flag_counts)
      out += "- " + flag + " (x" + std::to_string(count) + ")\n";
    out += "\n";
  }
  return out;
}

std::string ExperimentReport::results_json() const {
  json j;
  j["format"] = "svaug-results";
  j["version"] = 1;
  j["config"] = json::parse(config.to_json());
  j["pairing_unit"] = detail::kPairingUnit;
  json rounds_json = json::array();
  for (const auto& sr : rounds) {
    json r;
    r["seed"] = sr.seed;
    r["task"] = std::string(metric_name(sr.result.task));
    r["model"] = std::string(model_kind_name(sr.result.model));
    r["technique"] = std::string(technique_name(sr.result.technique));
    r["hyperparams"] = sr.result.hyperparams;
    r["round"] = sr.result.round;
    r["validation_mcc"] = sr.result.validation_mcc;
    r["test_mcc"] = sr.result.test_mcc;
    r["test_macro_f1"] = sr.result.test_macro_f1;
    r["validation_cm"] = cm_to_json(sr.result.validation_cm);
    r["test_cm"] = cm_to_json(sr.result.test_cm);
    r["flags"] = sr.result.flags;
    rounds_json.push_back(std::move(r));
  }
  j["rounds"] = std::move(rounds_json);
  json cents = json::array();
  for (const auto& c : centroids) {
    json e;
    e["task"] = std::string(metric_name(c.task));
    e["same"] = c.same;
    e["other"] = c.other;
    e["n_augmented"] = c.n_augmented;
    cents.push_back(std::move(e));
  }
  j["centroids"] = std::move(cents);
  j["asset_hashes"] = asset_hashes;
  return j.dump(2) + "\n";
}

ExperimentReport report_from_results_json(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw_input(std::string("results file is not valid JSON: ") + e.what());
  }
  try {
    if (!j.is_object() || j.value("format", "") != "svaug-results")
      throw_input("not a results file (missing format marker)");
    if (j.value("version", 0) != 1)
      throw_input("unsupported results version");

    ExperimentReport report;
    report.config = ExperimentConfig::from_json(j.at("config").dump());
    report.config.normalize();
    for (const auto& r : j.at("rounds")) {
      SeedRoundResult sr;
      sr.seed = r.at("seed").get<uint64_t>();
      auto task = metric_from_name(r.at("task").get<std::string>());
      auto model = model_kind_from_name(r.at("model").get<std::string>());
      auto technique = technique_from_name(r.at("technique").get<std::string>());
      if (!task || !model || !technique)
        throw_input("results: unknown task/model/technique name");
      sr.result.task = *task;
      sr.result.model = *model;
      sr.result.technique = *technique;
      sr.result.hyperparams = r.value("hyperparams", "");
      sr.result.round = r.at("round").get<int>();
      sr.result.validation_mcc = r.at("validation_mcc").get<double>();
      sr.result.test_mcc = r.at("test_mcc").get<double>();
      sr.result.test_macro_f1 = r.at("test_macro_f1").get<double>();
      sr.result.validation_cm = cm_from_json(r.at("validation_cm"));
      sr.result.test_cm = cm_from_json(r.at("test_cm"));
      for (const auto& f : r.value("flags", json::array()))
        sr.result.flags.push_back(f.get<std::string>());
      report.rounds.push_back(std::move(sr));
    }
    for (const auto& c : j.value("centroids", json::array())) {
      TaskCentroidReport tc;
      auto task = metric_from_name(c.at("task").get<std::string>());
      if (!task) throw_input("results: unknown centroid task name");
      tc.task = *task;
      tc.same = c.at("same").get<double>();
      tc.other = c.at("other").get<double>();
      tc.n_augmented = c.at("n_augmented").get<uint64_t>();
      report.centroids.push_back(tc);
    }
    for (const auto& h : j.value("asset_hashes", json::array()))
      report.asset_hashes.push_back(h.get<std::string>());

    detail::finalize_report(report);
    return report;
  } catch (const json::exception& e) {
    throw_input(std::string("results file: ") + e.what());
  }
}

void write_report_files(const ExperimentReport& report,
                        const std::string& out_dir, double elapsed_seconds) {
  std::filesystem::create_directories(out_dir);
  auto path = [&](const char* name) { return out_dir + "/" + name; };
  write_file(path("report.csv"), report.to_csv());
  write_file(path("report.md"), report.to_markdown());
  write_file(path("plot_diff.tsv"), report.to_plot_tsv());
  write_file(path("results.json"), report.results_json());
  if (!report.centroids.empty())
    write_file(path("centroids.csv"), report.centroids_csv());
  if (elapsed_seconds >= 0.0) {
    json meta;
    meta["generated_utc"] =
        format_iso8601_utc(static_cast<int64_t>(std::time(nullptr)));
    meta["elapsed_seconds"] = std::round(elapsed_seconds * 1000.0) / 1000.0;
    meta["pairing_unit"] = detail::kPairingUnit;
    meta["seeds"] = report.config.seeds;
    meta["asset_hashes"] = report.asset_hashes;
    write_file(path("run_meta.json"), meta.dump(2) + "\n");
  }
}

}  // namespace svaug
