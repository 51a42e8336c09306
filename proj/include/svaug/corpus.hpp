#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace svaug {

// The seven prediction targets. Class order within each metric is ordinal
// (least to most severe) and fixed; class indices everywhere refer to it.
enum class CvssMetric : uint8_t {
  AccessVector = 0,
  AccessComplexity,
  Authentication,
  Confidentiality,
  Integrity,
  Availability,
  Severity,
};

inline constexpr size_t kNumMetrics = 7;
inline constexpr size_t kNumClasses = 3;

inline constexpr std::array<CvssMetric, kNumMetrics> kAllMetrics = {
    CvssMetric::AccessVector,     CvssMetric::AccessComplexity,
    CvssMetric::Authentication,   CvssMetric::Confidentiality,
    CvssMetric::Integrity,        CvssMetric::Availability,
    CvssMetric::Severity,
};

std::string_view metric_name(CvssMetric m);          // "access_vector"
std::string_view metric_display_name(CvssMetric m);  // "Access Vector"
std::optional<CvssMetric> metric_from_name(std::string_view name);

const std::array<std::string_view, kNumClasses>& metric_classes(CvssMetric m);

// Case-insensitive; also accepts NVD feed spellings like ADJACENT_NETWORK.
std::optional<uint8_t> class_index_from_name(CvssMetric m,
                                             std::string_view name);

// Severity band for a CVSS v2 base score: [0,4) Low, [4,7) Medium,
// [7,10] High.
uint8_t severity_class_from_score(double base_score);

using LabelSet = std::array<uint8_t, kNumMetrics>;

struct VulnRecord {
  std::string id;
  std::string description;  // non-empty after trimming
  int64_t published = 0;    // epoch seconds, UTC
  LabelSet labels{};        // class index per metric, kAllMetrics order
};

// One feed item as ingested, before validation.
struct RawRecord {
  std::string id;
  std::string description;
  std::string published_raw;
  int64_t published = 0;
  bool published_ok = false;
  std::array<std::optional<uint8_t>, kNumMetrics> labels;
  std::optional<double> base_score;
  bool rejected = false;
  std::vector<std::string> diagnostics;
};

enum class FeedFormat { NvdJson11, NativeCsv };
std::optional<FeedFormat> feed_format_from_name(std::string_view name);

// Parses a feed; item order is preserved. Items with problems come back
// carrying diagnostics rather than being dropped here.
std::vector<RawRecord> ingest_feed(std::string_view bytes, FeedFormat format);

struct DropReport {
  size_t kept = 0;
  size_t rejected = 0;
  size_t missing_description = 0;
  size_t missing_cvss = 0;
  size_t bad_label = 0;
  size_t bad_date = 0;
  size_t duplicate = 0;
  std::vector<std::string> warnings;
};

struct Corpus {
  std::vector<VulnRecord> records;  // sorted by (published, id)
};

// Validates, derives Severity from the base score when no explicit class is
// present, deduplicates by id (later-published record wins) and sorts.
Corpus build_corpus(const std::vector<RawRecord>& raw,
                    DropReport* report = nullptr);

struct ClassStat {
  uint64_t count = 0;
  double fraction = 0.0;
};

std::array<ClassStat, kNumClasses> class_distribution(const Corpus& corpus,
                                                      CvssMetric metric);

// Native CSV: fixed header, description last and always quoted.
std::string corpus_to_csv(const Corpus& corpus);
Corpus load_corpus_file(const std::string& path, FeedFormat format,
                        DropReport* report = nullptr);

int64_t parse_iso8601_utc(std::string_view text);
std::string format_iso8601_utc(int64_t epoch_seconds);

std::string read_file(const std::string& path);
void write_file(const std::string& path, std::string_view contents);

}  // namespace svaug
