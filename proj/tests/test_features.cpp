#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "svaug/error.hpp"
#include "svaug/features.hpp"
#include "svaug/textprep.hpp"

using namespace svaug;

namespace {

TokenizedDoc doc(std::vector<std::string> proc) {
  TokenizedDoc d;
  d.raw_tokens = proc;
  d.proc_tokens = std::move(proc);
  return d;
}

// Three stemmed documents used throughout; weights below were computed
// independently with the same smoothed-idf formula and are frozen here.
std::vector<TokenizedDoc> sample_docs() {
  return {
      doc({"buffer", "overflow", "remote", "attack"}),
      doc({"remote", "code", "execut", "attack", "attack"}),
      doc({"local", "privileg", "escal"}),
  };
}

double weight_of(const SparseVector& v, const Vocabulary& vocab,
                 const std::string& term) {
  auto idx = vocab.lookup(term);
  REQUIRE(idx.has_value());
  for (const auto& [i, w] : v.entries)
    if (i == *idx) return w;
  return 0.0;
}

constexpr double kTol = 1e-12;

}  // namespace

TEST_SUITE("features") {

TEST_CASE("vocabulary orders terms by document frequency then name") {
  auto docs = sample_docs();
  Vocabulary vocab = fit_vocabulary(docs, 0.0);
  std::vector<std::string> expect = {"attack", "remote",   "buffer",
                                     "code",   "escal",    "execut",
                                     "local",  "overflow", "privileg"};
  CHECK(vocab.terms == expect);
  CHECK(vocab.n_docs == 3);
  CHECK(vocab.doc_freq[0] == 2);
  CHECK(vocab.doc_freq[1] == 2);
  for (size_t i = 2; i < vocab.size(); ++i) CHECK(vocab.doc_freq[i] == 1);
  CHECK(vocab.lookup("attack") == 0u);
  CHECK(vocab.lookup("privileg") == 8u);
  CHECK_FALSE(vocab.lookup("zebra").has_value());
}

TEST_CASE("smoothed idf values") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0));
  // ln((1+3)/(1+2)) + 1 and ln((1+3)/(1+1)) + 1.
  CHECK(model.idf[0] == doctest::Approx(1.2876820724517808).epsilon(kTol));
  CHECK(model.idf[1] == doctest::Approx(1.2876820724517808).epsilon(kTol));
  for (size_t i = 2; i < model.idf.size(); ++i)
    CHECK(model.idf[i] == doctest::Approx(1.6931471805599454).epsilon(kTol));
}

TEST_CASE("normalized weights match the reference values") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0));
  auto rows = model.transform_all(docs);
  REQUIRE(rows.size() == 3);

  const Vocabulary& v = model.vocab;
  CHECK(weight_of(rows[0], v, "attack") ==
        doctest::Approx(0.42804603506311856).epsilon(kTol));
  CHECK(weight_of(rows[0], v, "buffer") ==
        doctest::Approx(0.56282909649976653).epsilon(kTol));
  CHECK(weight_of(rows[0], v, "overflow") ==
        doctest::Approx(0.56282909649976653).epsilon(kTol));
  CHECK(weight_of(rows[0], v, "remote") ==
        doctest::Approx(0.42804603506311856).epsilon(kTol));

  CHECK(weight_of(rows[1], v, "attack") ==
        doctest::Approx(0.68770285923497088).epsilon(kTol));
  CHECK(weight_of(rows[1], v, "code") ==
        doctest::Approx(0.45212330826338581).epsilon(kTol));
  CHECK(weight_of(rows[1], v, "execut") ==
        doctest::Approx(0.45212330826338581).epsilon(kTol));
  CHECK(weight_of(rows[1], v, "remote") ==
        doctest::Approx(0.34385142961748544).epsilon(kTol));

  for (const char* term : {"escal", "local", "privileg"})
    CHECK(weight_of(rows[2], v, term) ==
          doctest::Approx(0.57735026918962573).epsilon(kTol));

  for (const auto& row : rows)
    CHECK(row.norm() == doctest::Approx(1.0).epsilon(kTol));
}

TEST_CASE("entries are sorted by index with no zeros") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0));
  for (const auto& row : model.transform_all(docs)) {
    for (size_t i = 1; i < row.entries.size(); ++i)
      CHECK(row.entries[i - 1].first < row.entries[i].first);
    for (const auto& [idx, w] : row.entries) {
      CHECK(idx < row.dims);
      CHECK(w != 0.0);
    }
    CHECK(row.dims == model.vocab.size());
  }
}

TEST_CASE("unknown terms are ignored at transform time") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0));

  auto mixed = model.transform(doc({"attack", "zebra", "attack"}));
  REQUIRE(mixed.entries.size() == 1);
  CHECK(mixed.entries[0].first == 0);
  CHECK(mixed.norm() == doctest::Approx(1.0).epsilon(kTol));

  auto unseen = model.transform(doc({"zebra", "quux"}));
  CHECK(unseen.entries.empty());
  CHECK(unseen.norm() == 0.0);
  CHECK(unseen.dims == model.vocab.size());
}

TEST_CASE("raw mode skips row normalization") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0), false);
  auto row = model.transform(docs[1]);
  // "attack" occurs twice in the second document.
  CHECK(weight_of(row, model.vocab, "attack") ==
        doctest::Approx(2.0 * 1.2876820724517808).epsilon(kTol));
  CHECK(weight_of(row, model.vocab, "code") ==
        doctest::Approx(1.6931471805599454).epsilon(kTol));
}

TEST_CASE("cosine similarity") {
  auto docs = sample_docs();
  TfIdfModel model = TfIdfModel::fit(docs, fit_vocabulary(docs, 0.0));
  auto rows = model.transform_all(docs);

  CHECK(cosine(rows[0], rows[1]) ==
        doctest::Approx(0.44155272329564882).epsilon(kTol));
  CHECK(cosine(rows[0], rows[0]) == doctest::Approx(1.0).epsilon(kTol));
  CHECK(cosine(rows[0], rows[2]) == 0.0);

  SparseVector zero;
  zero.dims = rows[0].dims;
  CHECK(cosine(rows[0], zero) == 0.0);

  SparseVector narrow;
  narrow.dims = 2;
  narrow.entries = {{0, 1.0}};
  CHECK_THROWS_AS(cosine(rows[0], narrow), Error);
}

TEST_CASE("sparse dot and norm by hand") {
  SparseVector a;
  a.dims = 5;
  a.entries = {{0, 3.0}, {2, 4.0}};
  SparseVector b;
  b.dims = 5;
  b.entries = {{2, 2.0}, {4, 7.0}};
  CHECK(a.norm() == doctest::Approx(5.0).epsilon(kTol));
  CHECK(a.dot(b) == doctest::Approx(8.0).epsilon(kTol));
  CHECK(b.dot(a) == doctest::Approx(8.0).epsilon(kTol));
}

TEST_CASE("triplet export lists row, column, weight") {
  SparseVector a;
  a.dims = 3;
  a.entries = {{1, 0.5}};
  SparseVector b;
  b.dims = 3;
  b.entries = {{0, 1.0}, {2, 0.25}};
  std::string out = to_triplets({a, b});
  CHECK(out == "0 1 0.5\n1 0 1\n1 2 0.25\n");
}

TEST_CASE("fitting on empty input is an error") {
  std::vector<TokenizedDoc> empty;
  CHECK_THROWS_AS(fit_vocabulary(empty, 0.0), Error);
  std::vector<TokenizedDoc> blank = {doc({}), doc({})};
  try {
    fit_vocabulary(blank, 0.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyData);
  }
}

}  // TEST_SUITE
