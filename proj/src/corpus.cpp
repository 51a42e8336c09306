#include "svaug/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "svaug/error.hpp"

namespace svaug {

namespace {

constexpr std::array<std::string_view, kNumMetrics> kMetricNames = {
    "access_vector", "access_complexity", "authentication",
    "confidentiality", "integrity", "availability", "severity"};

constexpr std::array<std::string_view, kNumMetrics> kMetricDisplay = {
    "Access Vector", "Access Complexity", "Authentication",
    "Confidentiality", "Integrity", "Availability", "Severity"};

constexpr std::array<std::array<std::string_view, kNumClasses>, kNumMetrics>
    kClassNames = {{
        {"Local", "AdjacentNetwork", "Network"},
        {"High", "Medium", "Low"},
        {"Multiple", "Single", "None"},
        {"None", "Partial", "Complete"},
        {"None", "Partial", "Complete"},
        {"None", "Partial", "Complete"},
        {"Low", "Medium", "High"},
    }};

std::string normalize_name(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    if (c == '_' || c == ' ' || c == '-' || c == '.') continue;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

bool is_blank(std::string_view s) {
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c))) return false;
  return true;
}

std::string trim(std::string_view s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

int64_t days_from_civil(int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<int64_t>(doe) - 719468;
}

void civil_from_days(int64_t z, int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const int64_t yy = static_cast<int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp < 10 ? mp + 3 : mp - 9;
  y = yy + (m <= 2);
}

bool parse_uint(std::string_view s, size_t& pos, int width, int& out) {
  if (pos + width > s.size()) return false;
  int v = 0;
  for (int i = 0; i < width; ++i) {
    char c = s[pos + i];
    if (c < '0' || c > '9') return false;
    v = v * 10 + (c - '0');
  }
  pos += width;
  out = v;
  return true;
}

constexpr std::string_view kCsvHeader =
    "id,published,access_vector,access_complexity,authentication,"
    "confidentiality,integrity,availability,severity,description";

constexpr std::string_view kRejectMarker = "** REJECT **";

}  // namespace

std::string_view metric_name(CvssMetric m) {
  return kMetricNames[static_cast<size_t>(m)];
}

std::string_view metric_display_name(CvssMetric m) {
  return kMetricDisplay[static_cast<size_t>(m)];
}

std::optional<CvssMetric> metric_from_name(std::string_view name) {
  std::string n = normalize_name(name);
  for (size_t i = 0; i < kNumMetrics; ++i) {
    if (n == normalize_name(kMetricNames[i]) ||
        n == normalize_name(kMetricDisplay[i]))
      return static_cast<CvssMetric>(i);
  }
  return std::nullopt;
}

const std::array<std::string_view, kNumClasses>& metric_classes(CvssMetric m) {
  return kClassNames[static_cast<size_t>(m)];
}

std::optional<uint8_t> class_index_from_name(CvssMetric m,
                                             std::string_view name) {
  std::string n = normalize_name(name);
  const auto& classes = kClassNames[static_cast<size_t>(m)];
  for (uint8_t i = 0; i < kNumClasses; ++i) {
    if (n == normalize_name(classes[i])) return i;
  }
  return std::nullopt;
}

uint8_t severity_class_from_score(double base_score) {
  if (base_score >= 7.0) return 2;
  if (base_score >= 4.0) return 1;
  return 0;
}

std::optional<FeedFormat> feed_format_from_name(std::string_view name) {
  std::string n = normalize_name(name);
  if (n == "nvdjson11" || n == "nvdjson" || n == "nvd") return FeedFormat::NvdJson11;
  if (n == "csv" || n == "nativecsv") return FeedFormat::NativeCsv;
  return std::nullopt;
}

int64_t parse_iso8601_utc(std::string_view text) {
  // YYYY-MM-DD[THH:MM[:SS][.fff]][Z|+HH:MM|-HH:MM]
  size_t pos = 0;
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  if (!parse_uint(text, pos, 4, year) || pos >= text.size() || text[pos] != '-')
    throw_input("bad date: " + std::string(text));
  ++pos;
  if (!parse_uint(text, pos, 2, month) || pos >= text.size() || text[pos] != '-')
    throw_input("bad date: " + std::string(text));
  ++pos;
  if (!parse_uint(text, pos, 2, day))
    throw_input("bad date: " + std::string(text));
  if (pos < text.size() && (text[pos] == 'T' || text[pos] == ' ')) {
    ++pos;
    if (!parse_uint(text, pos, 2, hour) || pos >= text.size() ||
        text[pos] != ':')
      throw_input("bad time: " + std::string(text));
    ++pos;
    if (!parse_uint(text, pos, 2, minute))
      throw_input("bad time: " + std::string(text));
    if (pos < text.size() && text[pos] == ':') {
      ++pos;
      if (!parse_uint(text, pos, 2, second))
        throw_input("bad time: " + std::string(text));
      if (pos < text.size() && text[pos] == '.') {
        ++pos;
        while (pos < text.size() &&
               std::isdigit(static_cast<unsigned char>(text[pos])))
          ++pos;
      }
    }
  }
  int64_t offset = 0;
  if (pos < text.size()) {
    char c = text[pos];
    if (c == 'Z') {
      ++pos;
    } else if (c == '+' || c == '-') {
      ++pos;
      int oh = 0, om = 0;
      if (!parse_uint(text, pos, 2, oh))
        throw_input("bad timezone: " + std::string(text));
      if (pos < text.size() && text[pos] == ':') ++pos;
      if (pos < text.size() &&
          std::isdigit(static_cast<unsigned char>(text[pos]))) {
        if (!parse_uint(text, pos, 2, om))
          throw_input("bad timezone: " + std::string(text));
      }
      offset = (c == '+' ? 1 : -1) * (oh * 3600LL + om * 60LL);
    }
  }
  if (pos != text.size())
    throw_input("trailing characters in date: " + std::string(text));
  if (month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
      minute > 59 || second > 60)
    throw_input("date out of range: " + std::string(text));
  int64_t days = days_from_civil(year, static_cast<unsigned>(month),
                                 static_cast<unsigned>(day));
  return days * 86400 + hour * 3600 + minute * 60 + second - offset;
}

std::string format_iso8601_utc(int64_t epoch_seconds) {
  int64_t days = epoch_seconds / 86400;
  int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int64_t y;
  unsigned m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw_input("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw_input("cannot write file: " + path);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw_input("write failed: " + path);
}

namespace {

void set_published(RawRecord& rec, const std::string& raw) {
  rec.published_raw = raw;
  try {
    rec.published = parse_iso8601_utc(raw);
    rec.published_ok = true;
  } catch (const Error&) {
    rec.published_ok = false;
    rec.diagnostics.push_back("bad-date");
  }
}

std::vector<RawRecord> ingest_nvd(std::string_view bytes) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::parse_error& e) {
    throw_input("feed is not valid JSON at byte " + std::to_string(e.byte) +
                ": " + e.what());
  }
  if (!j.is_object() || !j.contains("CVE_Items") || !j["CVE_Items"].is_array())
    throw_input("feed has no CVE_Items array");

  std::vector<RawRecord> out;
  out.reserve(j["CVE_Items"].size());
  for (const auto& item : j["CVE_Items"]) {
    RawRecord rec;
    const auto* cve = item.contains("cve") ? &item["cve"] : nullptr;
    if (cve && cve->contains("CVE_data_meta") &&
        (*cve)["CVE_data_meta"].contains("ID") &&
        (*cve)["CVE_data_meta"]["ID"].is_string()) {
      rec.id = (*cve)["CVE_data_meta"]["ID"].get<std::string>();
    } else {
      rec.diagnostics.push_back("missing-id");
    }

    if (cve && cve->contains("description") &&
        (*cve)["description"].contains("description_data") &&
        (*cve)["description"]["description_data"].is_array() &&
        !(*cve)["description"]["description_data"].empty()) {
      const auto& dd = (*cve)["description"]["description_data"];
      const nlohmann::json* chosen = nullptr;
      for (const auto& entry : dd) {
        if (entry.value("lang", "") == "en") {
          chosen = &entry;
          break;
        }
      }
      if (!chosen) chosen = &dd.front();
      if (chosen->contains("value") && (*chosen)["value"].is_string())
        rec.description = (*chosen)["value"].get<std::string>();
    }
    if (is_blank(rec.description))
      rec.diagnostics.push_back("missing-description");
    if (rec.description.find(kRejectMarker) != std::string::npos) {
      rec.rejected = true;
      rec.diagnostics.push_back("rejected");
    }

    if (item.contains("publishedDate") && item["publishedDate"].is_string()) {
      set_published(rec, item["publishedDate"].get<std::string>());
    } else {
      rec.diagnostics.push_back("bad-date");
    }

    const nlohmann::json* base = nullptr;
    if (item.contains("impact") && item["impact"].contains("baseMetricV2"))
      base = &item["impact"]["baseMetricV2"];
    if (!base || !base->contains("cvssV2")) {
      rec.diagnostics.push_back("missing-cvss");
    } else {
      const auto& v2 = (*base)["cvssV2"];
      static constexpr std::array<std::string_view, 6> kFields = {
          "accessVector",          "accessComplexity", "authentication",
          "confidentialityImpact", "integrityImpact",  "availabilityImpact"};
      for (size_t i = 0; i < kFields.size(); ++i) {
        std::string key(kFields[i]);
        if (v2.contains(key) && v2[key].is_string()) {
          auto idx = class_index_from_name(static_cast<CvssMetric>(i),
                                           v2[key].get<std::string>());
          if (idx)
            rec.labels[i] = idx;
          else
            rec.diagnostics.push_back("bad-label:" +
                                      std::string(kMetricNames[i]));
        } else {
          rec.diagnostics.push_back("bad-label:" + std::string(kMetricNames[i]));
        }
      }
      if (v2.contains("baseScore") && v2["baseScore"].is_number())
        rec.base_score = v2["baseScore"].get<double>();
      if (base->contains("severity") && (*base)["severity"].is_string()) {
        auto idx = class_index_from_name(CvssMetric::Severity,
                                         (*base)["severity"].get<std::string>());
        if (idx) rec.labels[6] = idx;
      }
    }
    out.push_back(std::move(rec));
  }
  return out;
}

// RFC-4180-ish reader: quoted fields with doubled quotes, \n or \r\n rows.
std::vector<std::vector<std::string>> parse_csv(std::string_view bytes) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t line = 1;
  for (size_t i = 0; i < bytes.size(); ++i) {
    char c = bytes[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty())
          throw_input("stray quote in CSV line " + std::to_string(line));
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
        break;
      case '\r':
        break;
      case '\n':
        if (!row.empty() || !field.empty() || field_started) {
          row.push_back(std::move(field));
          field.clear();
          field_started = false;
          rows.push_back(std::move(row));
          row.clear();
        }
        ++line;
        break;
      default:
        field.push_back(c);
        break;
    }
  }
  if (in_quotes) throw_input("unterminated quote in CSV");
  if (!row.empty() || !field.empty() || field_started) {
    row.push_back(std::move(field));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<RawRecord> ingest_csv(std::string_view bytes) {
  auto rows = parse_csv(bytes);
  if (rows.empty()) throw_empty("CSV feed is empty");
  std::string header;
  for (size_t i = 0; i < rows[0].size(); ++i) {
    if (i) header.push_back(',');
    header += rows[0][i];
  }
  if (header != kCsvHeader)
    throw_input("unexpected CSV header: " + header);

  std::vector<RawRecord> out;
  out.reserve(rows.size() - 1);
  for (size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != 10)
      throw_input("CSV row " + std::to_string(r + 1) + " has " +
                  std::to_string(row.size()) + " fields, expected 10");
    RawRecord rec;
    rec.id = row[0];
    if (rec.id.empty()) rec.diagnostics.push_back("missing-id");
    set_published(rec, row[1]);
    for (size_t m = 0; m < kNumMetrics; ++m) {
      auto idx =
          class_index_from_name(static_cast<CvssMetric>(m), row[2 + m]);
      if (idx)
        rec.labels[m] = idx;
      else
        rec.diagnostics.push_back("bad-label:" + std::string(kMetricNames[m]));
    }
    rec.description = row[9];
    if (is_blank(rec.description))
      rec.diagnostics.push_back("missing-description");
    if (rec.description.find(kRejectMarker) != std::string::npos) {
      rec.rejected = true;
      rec.diagnostics.push_back("rejected");
    }
    out.push_back(std::move(rec));
  }
  return out;
}

bool has_diag_prefix(const RawRecord& rec, std::string_view prefix) {
  for (const auto& d : rec.diagnostics)
    if (d.rfind(prefix, 0) == 0) return true;
  return false;
}

}  // namespace

std::vector<RawRecord> ingest_feed(std::string_view bytes, FeedFormat format) {
  switch (format) {
    case FeedFormat::NvdJson11:
      return ingest_nvd(bytes);
    case FeedFormat::NativeCsv:
      return ingest_csv(bytes);
  }
  throw_input("unknown feed format");
}

Corpus build_corpus(const std::vector<RawRecord>& raw, DropReport* report) {
  DropReport local;
  DropReport& rep = report ? *report : local;

  std::vector<VulnRecord> records;
  std::unordered_map<std::string, size_t> by_id;
  for (const auto& r : raw) {
    if (r.rejected) {
      ++rep.rejected;
      continue;
    }
    if (r.id.empty()) {
      ++rep.bad_label;
      rep.warnings.push_back("dropped a record with no id");
      continue;
    }
    std::string desc = trim(r.description);
    if (desc.empty()) {
      ++rep.missing_description;
      continue;
    }
    if (!r.published_ok) {
      ++rep.bad_date;
      continue;
    }
    if (has_diag_prefix(r, "missing-cvss")) {
      ++rep.missing_cvss;
      continue;
    }
    VulnRecord rec;
    rec.id = r.id;
    rec.description = std::move(desc);
    rec.published = r.published;
    bool ok = true;
    for (size_t m = 0; m < kNumMetrics; ++m) {
      if (r.labels[m]) {
        rec.labels[m] = *r.labels[m];
      } else if (m == static_cast<size_t>(CvssMetric::Severity) &&
                 r.base_score) {
        rec.labels[m] = severity_class_from_score(*r.base_score);
      } else {
        ok = false;
        break;
      }
    }
    if (!ok) {
      ++rep.bad_label;
      continue;
    }

    auto it = by_id.find(rec.id);
    if (it != by_id.end()) {
      ++rep.duplicate;
      VulnRecord& kept = records[it->second];
      if (rec.published >= kept.published) {
        rep.warnings.push_back("duplicate id " + rec.id +
                               ": kept the later-published record");
        kept = std::move(rec);
      } else {
        rep.warnings.push_back("duplicate id " + rec.id +
                               ": dropped the earlier-published record");
      }
      continue;
    }
    by_id.emplace(rec.id, records.size());
    records.push_back(std::move(rec));
  }

  if (records.empty()) throw_empty("no usable records in the feed");

  std::stable_sort(records.begin(), records.end(),
                   [](const VulnRecord& a, const VulnRecord& b) {
                     if (a.published != b.published)
                       return a.published < b.published;
                     return a.id < b.id;
                   });
  rep.kept = records.size();
  return Corpus{std::move(records)};
}

std::array<ClassStat, kNumClasses> class_distribution(const Corpus& corpus,
                                                      CvssMetric metric) {
  if (corpus.records.empty()) throw_empty("corpus is empty");
  std::array<ClassStat, kNumClasses> out{};
  for (const auto& rec : corpus.records)
    ++out[rec.labels[static_cast<size_t>(metric)]].count;
  double total = static_cast<double>(corpus.records.size());
  for (auto& s : out) s.fraction = static_cast<double>(s.count) / total;
  return out;
}

std::string corpus_to_csv(const Corpus& corpus) {
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const auto& rec : corpus.records) {
    out += rec.id;
    out.push_back(',');
    out += format_iso8601_utc(rec.published);
    for (size_t m = 0; m < kNumMetrics; ++m) {
      out.push_back(',');
      out += kClassNames[m][rec.labels[m]];
    }
    out.push_back(',');
    out.push_back('"');
    for (char c : rec.description) {
      out.push_back(c);
      if (c == '"') out.push_back('"');
    }
    out.push_back('"');
    out.push_back('\n');
  }
  return out;
}

Corpus load_corpus_file(const std::string& path, FeedFormat format,
                        DropReport* report) {
  return build_corpus(ingest_feed(read_file(path), format), report);
}

}  // namespace svaug
