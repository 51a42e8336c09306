#include <doctest.h>

#include <set>
#include <string>

#include "svaug/corpus.hpp"
#include "svaug/error.hpp"

using namespace svaug;

namespace {

const char* kNvdSample = R"({
  "CVE_Items": [
    {
      "cve": {
        "CVE_data_meta": {"ID": "CVE-1999-0002"},
        "description": {"description_data": [
          {"lang": "en", "value": "Buffer overflow in NFS mountd gives root access to remote attackers."}
        ]}
      },
      "impact": {"baseMetricV2": {"cvssV2": {
        "accessVector": "NETWORK",
        "accessComplexity": "LOW",
        "authentication": "NONE",
        "confidentialityImpact": "COMPLETE",
        "integrityImpact": "COMPLETE",
        "availabilityImpact": "COMPLETE",
        "baseScore": 10.0
      }, "severity": "HIGH"}},
      "publishedDate": "1998-10-12T04:00Z"
    },
    {
      "cve": {
        "CVE_data_meta": {"ID": "CVE-1999-0003"},
        "description": {"description_data": [
          {"lang": "en", "value": "Execute commands as root via buffer overflow in Tooltalk database server."}
        ]}
      },
      "impact": {"baseMetricV2": {"cvssV2": {
        "accessVector": "NETWORK",
        "accessComplexity": "LOW",
        "authentication": "NONE",
        "confidentialityImpact": "PARTIAL",
        "integrityImpact": "PARTIAL",
        "availabilityImpact": "PARTIAL",
        "baseScore": 7.5
      }}},
      "publishedDate": "1999-01-29T05:00Z"
    },
    {
      "cve": {
        "CVE_data_meta": {"ID": "CVE-1999-0012"},
        "description": {"description_data": [
          {"lang": "en", "value": "** REJECT ** DO NOT USE THIS CANDIDATE NUMBER."}
        ]}
      },
      "impact": {"baseMetricV2": {"cvssV2": {
        "accessVector": "LOCAL",
        "accessComplexity": "LOW",
        "authentication": "NONE",
        "confidentialityImpact": "NONE",
        "integrityImpact": "NONE",
        "availabilityImpact": "PARTIAL",
        "baseScore": 2.1
      }}},
      "publishedDate": "1999-01-01T05:00Z"
    },
    {
      "cve": {
        "CVE_data_meta": {"ID": "CVE-1999-0100"},
        "description": {"description_data": [
          {"lang": "en", "value": "A vulnerability with no CVSS assessment attached."}
        ]}
      },
      "impact": {},
      "publishedDate": "1999-02-01T05:00Z"
    }
  ]
})";

}  // namespace

TEST_SUITE("corpus") {

TEST_CASE("severity bands follow the v2 score ranges") {
  CHECK(severity_class_from_score(0.0) == 0);
  CHECK(severity_class_from_score(3.9) == 0);
  CHECK(severity_class_from_score(4.0) == 1);
  CHECK(severity_class_from_score(6.9) == 1);
  CHECK(severity_class_from_score(7.0) == 2);
  CHECK(severity_class_from_score(10.0) == 2);
}

TEST_CASE("metric names resolve in several spellings") {
  CHECK(metric_from_name("access_vector") == CvssMetric::AccessVector);
  CHECK(metric_from_name("Access Vector") == CvssMetric::AccessVector);
  CHECK(metric_from_name("ACCESS-COMPLEXITY") == CvssMetric::AccessComplexity);
  CHECK(metric_from_name("severity") == CvssMetric::Severity);
  CHECK(!metric_from_name("exploitability"));
  CHECK(metric_name(CvssMetric::Confidentiality) == "confidentiality");
  CHECK(metric_display_name(CvssMetric::Integrity) == "Integrity");
}

TEST_CASE("class names accept feed spellings and stay ordinal") {
  CHECK(class_index_from_name(CvssMetric::AccessVector, "LOCAL") == 0);
  CHECK(class_index_from_name(CvssMetric::AccessVector, "ADJACENT_NETWORK") == 1);
  CHECK(class_index_from_name(CvssMetric::AccessVector, "AdjacentNetwork") == 1);
  CHECK(class_index_from_name(CvssMetric::AccessVector, "NETWORK") == 2);
  CHECK(class_index_from_name(CvssMetric::AccessComplexity, "high") == 0);
  CHECK(class_index_from_name(CvssMetric::AccessComplexity, "LOW") == 2);
  CHECK(class_index_from_name(CvssMetric::Authentication, "MULTIPLE") == 0);
  CHECK(class_index_from_name(CvssMetric::Authentication, "SINGLE") == 1);
  CHECK(class_index_from_name(CvssMetric::Confidentiality, "PARTIAL") == 1);
  CHECK(class_index_from_name(CvssMetric::Severity, "Medium") == 1);
  CHECK(!class_index_from_name(CvssMetric::Severity, "CRITICAL"));

  const auto& av = metric_classes(CvssMetric::AccessVector);
  CHECK(av[0] == "Local");
  CHECK(av[1] == "AdjacentNetwork");
  CHECK(av[2] == "Network");
}

TEST_CASE("iso8601 parsing hits known epoch anchors") {
  CHECK(parse_iso8601_utc("1999-06-01T00:00:00Z") == 928195200);
  CHECK(parse_iso8601_utc("2001-09-16T08:41:00Z") == 1000629660);
  CHECK(parse_iso8601_utc("2020-02-29T23:59:59Z") == 1583020799);
  CHECK(parse_iso8601_utc("1970-01-01T00:00:00Z") == 0);
  // offsets shift back to UTC
  CHECK(parse_iso8601_utc("2020-01-01T05:30:00+05:30") ==
        parse_iso8601_utc("2020-01-01T00:00:00Z"));
  CHECK(parse_iso8601_utc("2019-12-31T19:00:00-05:00") ==
        parse_iso8601_utc("2020-01-01T00:00:00Z"));
  // NVD feeds use minute precision without seconds
  CHECK(parse_iso8601_utc("1998-10-12T04:00Z") ==
        parse_iso8601_utc("1998-10-12T04:00:00Z"));
  // date only
  CHECK(parse_iso8601_utc("1999-06-01") == 928195200);
}

TEST_CASE("iso8601 round trips through formatting") {
  for (const char* s : {"1999-06-01T00:00:00Z", "2001-09-16T08:41:00Z",
                        "2020-02-29T23:59:59Z", "1970-01-01T00:00:00Z"}) {
    CHECK(format_iso8601_utc(parse_iso8601_utc(s)) == s);
  }
}

TEST_CASE("bad dates raise input errors") {
  CHECK_THROWS_AS(parse_iso8601_utc("not a date"), Error);
  CHECK_THROWS_AS(parse_iso8601_utc("1999-13-01T00:00:00Z"), Error);
  CHECK_THROWS_AS(parse_iso8601_utc("1999-06-01T00:00:00Zjunk"), Error);
  try {
    parse_iso8601_utc("1999-99-99");
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.exit_code() == 2);
  }
}

TEST_CASE("nvd feed ingestion keeps usable items and flags the rest") {
  auto raw = ingest_feed(kNvdSample, FeedFormat::NvdJson11);
  REQUIRE(raw.size() == 4);
  CHECK(raw[0].id == "CVE-1999-0002");
  CHECK(raw[0].published_ok);
  CHECK(raw[0].labels[0] == 2);  // Network
  CHECK(raw[0].labels[6] == 2);  // explicit HIGH severity
  CHECK(!raw[1].labels[6]);      // severity must come from the base score
  CHECK(raw[1].base_score == 7.5);
  CHECK(raw[2].rejected);
  CHECK(!raw[3].base_score);

  DropReport rep;
  Corpus corpus = build_corpus(raw, &rep);
  CHECK(rep.kept == 2);
  CHECK(rep.rejected == 1);
  CHECK(rep.missing_cvss == 1);
  REQUIRE(corpus.records.size() == 2);
  // sorted by publication time
  CHECK(corpus.records[0].id == "CVE-1999-0002");
  CHECK(corpus.records[1].id == "CVE-1999-0003");
  // derived severity: 7.5 -> High
  CHECK(corpus.records[1].labels[6] == 2);
}

TEST_CASE("invalid feed JSON is an input error") {
  CHECK_THROWS_AS(ingest_feed("{not json", FeedFormat::NvdJson11), Error);
  CHECK_THROWS_AS(ingest_feed(R"({"foo": 1})", FeedFormat::NvdJson11), Error);
}

TEST_CASE("csv round trip preserves every field byte for byte") {
  auto raw = ingest_feed(kNvdSample, FeedFormat::NvdJson11);
  Corpus corpus = build_corpus(raw);
  std::string csv = corpus_to_csv(corpus);
  Corpus again = build_corpus(ingest_feed(csv, FeedFormat::NativeCsv));
  REQUIRE(again.records.size() == corpus.records.size());
  for (size_t i = 0; i < corpus.records.size(); ++i) {
    CHECK(again.records[i].id == corpus.records[i].id);
    CHECK(again.records[i].description == corpus.records[i].description);
    CHECK(again.records[i].published == corpus.records[i].published);
    CHECK(again.records[i].labels == corpus.records[i].labels);
  }
  CHECK(corpus_to_csv(again) == csv);
}

TEST_CASE("csv quoting survives embedded quotes commas and newlines") {
  Corpus corpus;
  VulnRecord rec;
  rec.id = "CVE-2000-0001";
  rec.description = "says \"hello, world\"\nacross two lines";
  rec.published = 946684800;
  rec.labels = {2, 2, 2, 1, 1, 1, 1};
  corpus.records.push_back(rec);
  std::string csv = corpus_to_csv(corpus);
  Corpus again = build_corpus(ingest_feed(csv, FeedFormat::NativeCsv));
  REQUIRE(again.records.size() == 1);
  CHECK(again.records[0].description == rec.description);
}

TEST_CASE("duplicate ids keep the later published record") {
  std::vector<RawRecord> raw(2);
  raw[0].id = "CVE-2001-0001";
  raw[0].description = "older text";
  raw[0].published = 100;
  raw[0].published_ok = true;
  for (size_t m = 0; m < kNumMetrics; ++m) raw[0].labels[m] = 0;
  raw[1] = raw[0];
  raw[1].description = "newer text";
  raw[1].published = 200;

  DropReport rep;
  Corpus corpus = build_corpus(raw, &rep);
  CHECK(rep.duplicate == 1);
  REQUIRE(corpus.records.size() == 1);
  CHECK(corpus.records[0].description == "newer text");
  CHECK(corpus.records[0].published == 200);
}

TEST_CASE("sorting breaks publication ties by id") {
  std::vector<RawRecord> raw(3);
  const char* ids[] = {"CVE-2001-0300", "CVE-2001-0100", "CVE-2001-0200"};
  for (size_t i = 0; i < 3; ++i) {
    raw[i].id = ids[i];
    raw[i].description = "text";
    raw[i].published = 500;
    raw[i].published_ok = true;
    for (size_t m = 0; m < kNumMetrics; ++m) raw[i].labels[m] = 1;
  }
  Corpus corpus = build_corpus(raw);
  CHECK(corpus.records[0].id == "CVE-2001-0100");
  CHECK(corpus.records[1].id == "CVE-2001-0200");
  CHECK(corpus.records[2].id == "CVE-2001-0300");
}

TEST_CASE("records without usable labels or dates are dropped") {
  std::vector<RawRecord> raw(4);
  raw[0].id = "CVE-2002-0001";
  raw[0].description = "fine";
  raw[0].published = 1;
  raw[0].published_ok = true;
  for (size_t m = 0; m < kNumMetrics; ++m) raw[0].labels[m] = 0;

  raw[1] = raw[0];
  raw[1].id = "CVE-2002-0002";
  raw[1].published_ok = false;  // unparseable date

  raw[2] = raw[0];
  raw[2].id = "CVE-2002-0003";
  raw[2].labels[3].reset();  // missing confidentiality, no fallback

  raw[3] = raw[0];
  raw[3].id = "CVE-2002-0004";
  raw[3].labels[6].reset();  // severity recoverable from the score
  raw[3].base_score = 5.0;

  DropReport rep;
  Corpus corpus = build_corpus(raw, &rep);
  CHECK(rep.kept == 2);
  CHECK(rep.bad_date == 1);
  CHECK(rep.bad_label == 1);
  REQUIRE(corpus.records.size() == 2);
  CHECK(corpus.records[1].labels[6] == 1);  // 5.0 -> Medium
}

TEST_CASE("an all dropped feed raises empty data") {
  std::vector<RawRecord> raw(1);
  raw[0].id = "CVE-2002-0009";
  raw[0].description = "   ";
  raw[0].published_ok = true;
  try {
    build_corpus(raw);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyData);
    CHECK(e.exit_code() == 3);
  }
}

TEST_CASE("csv with a wrong header is rejected") {
  CHECK_THROWS_AS(ingest_feed("id,published,description\nx,y,z",
                              FeedFormat::NativeCsv),
                  Error);
}

TEST_CASE("class distribution counts every record once") {
  auto raw = ingest_feed(kNvdSample, FeedFormat::NvdJson11);
  Corpus corpus = build_corpus(raw);
  auto dist = class_distribution(corpus, CvssMetric::Confidentiality);
  uint64_t total = 0;
  double frac = 0.0;
  for (const auto& s : dist) {
    total += s.count;
    frac += s.fraction;
  }
  CHECK(total == corpus.records.size());
  CHECK(frac == doctest::Approx(1.0));
  CHECK(dist[1].count == 1);  // Partial
  CHECK(dist[2].count == 1);  // Complete
}

TEST_CASE("feed format names resolve") {
  CHECK(feed_format_from_name("nvd-json-1.1") == FeedFormat::NvdJson11);
  CHECK(feed_format_from_name("csv") == FeedFormat::NativeCsv);
  CHECK(feed_format_from_name("native-csv") == FeedFormat::NativeCsv);
  CHECK(!feed_format_from_name("xml"));
}

TEST_CASE("bundled corpus loads sorted with every class represented") {
  std::string path = std::string(SVAUG_SOURCE_DIR) + "/assets/mini_corpus.csv";
  Corpus corpus = load_corpus_file(path, FeedFormat::NativeCsv);
  REQUIRE(corpus.records.size() == 2000);
  for (size_t i = 1; i < corpus.records.size(); ++i) {
    const auto& a = corpus.records[i - 1];
    const auto& b = corpus.records[i];
    CHECK((a.published < b.published ||
           (a.published == b.published && a.id < b.id)));
  }
  for (CvssMetric m : kAllMetrics) {
    auto dist = class_distribution(corpus, m);
    for (size_t c = 0; c < kNumClasses; ++c) {
      INFO("metric ", metric_name(m), " class ", c);
      CHECK(dist[c].count >= 20);
    }
  }
}

}  // TEST_SUITE
