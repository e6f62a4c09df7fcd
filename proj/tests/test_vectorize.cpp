#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "fcm/error.hpp"
#include "fcm/random.hpp"
#include "fcm/vectorize.hpp"
#include "tfidf_oracle.hpp"

using namespace fcm;
using namespace fcm::vectorize;
using preprocess::TokenizedDoc;

namespace {

TokenizedDoc doc(const std::string& id, std::vector<std::string> tokens) {
  const auto n = tokens.size();
  return {id, std::move(tokens), n};
}

}  // namespace

TEST(Vocabulary, ThresholdFromFraction) {
  EXPECT_EQ(min_doc_count(0.025, 247), 7u);
  EXPECT_EQ(min_doc_count(0.025, 4), 1u);
  EXPECT_EQ(min_doc_count(1.0, 10), 10u);
  EXPECT_EQ(min_doc_count(0.025, 400), 10u);  // exactly 10.0, no float creep to 11
  EXPECT_EQ(min_doc_count(0.1, 30), 3u);
}

TEST(Vocabulary, RareTokenKeptAtLowThreshold) {
  std::vector<TokenizedDoc> docs{doc("a", {"x", "y"}), doc("b", {"y"}), doc("c", {"y"}), doc("d", {"y"})};
  auto v = build_vocabulary(docs, 0.025);
  EXPECT_EQ(v.terms, (std::vector<std::string>{"x", "y"}));
  EXPECT_EQ(v.doc_freq, (std::vector<std::uint32_t>{1, 4}));
}

TEST(Vocabulary, FullFractionExcludesNearlyUniversal) {
  std::vector<TokenizedDoc> docs{doc("a", {"x", "y"}), doc("b", {"y", "x"}), doc("c", {"y"})};
  auto v = build_vocabulary(docs, 1.0);
  EXPECT_EQ(v.terms, std::vector<std::string>{"y"});
}

TEST(Vocabulary, CountsDistinctDocumentsAndIndexIsInverse) {
  std::vector<TokenizedDoc> docs{doc("a", {"b", "b", "b", "a"}), doc("b", {"c", "a"})};
  auto v = build_vocabulary(docs, 0.5);
  EXPECT_EQ(v.doc_freq, (std::vector<std::uint32_t>{2, 1, 1}));
  for (std::uint32_t i = 0; i < v.size(); ++i) EXPECT_EQ(v.index.at(v.terms[i]), i);
  EXPECT_EQ(v.index.size(), v.size());
}

TEST(Vocabulary, EmptyVocabulary) {
  std::vector<TokenizedDoc> docs{doc("a", {"x"}), doc("b", {"y"})};
  EXPECT_THROW(build_vocabulary(docs, 1.0), EmptyVocabulary);
  EXPECT_THROW(build_vocabulary({doc("a", {})}, 0.5), EmptyVocabulary);
}

TEST(Vocabulary, InsertionOrderOfIdenticalContentIrrelevant) {
  std::vector<TokenizedDoc> a{doc("1", {"p", "q"}), doc("2", {"q", "r"}), doc("3", {"r", "s"})};
  std::vector<TokenizedDoc> b{a[2], a[0], a[1]};
  auto va = build_vocabulary(a, 0.3), vb = build_vocabulary(b, 0.3);
  EXPECT_EQ(va.terms, vb.terms);
  EXPECT_EQ(va.doc_freq, vb.doc_freq);
}

TEST(TermFrequency, RawCounts) {
  std::vector<TokenizedDoc> docs{doc("1", {"a", "a", "b", "zz"}), doc("2", {}), doc("3", {"b"})};
  Vocabulary v = build_vocabulary({doc("1", {"a", "b"})}, 1.0);
  auto tf = term_frequency_matrix(docs, v).to_dense();
  ASSERT_EQ(tf.rows(), 2);
  ASSERT_EQ(tf.cols(), 3);
  EXPECT_EQ(tf(0, 0), 2.0);
  EXPECT_EQ(tf(1, 0), 1.0);
  EXPECT_EQ(tf.col(1).squaredNorm(), 0.0);
  EXPECT_EQ(tf(1, 2), 1.0);
}

TEST(Idf, Values) {
  SparseMatrix tf;
  tf.rows = 2;
  tf.cols = 4;
  tf.entries = {{0, 0, 1}, {1, 0, 1}, {1, 1, 1}, {1, 2, 3}, {1, 3, 1}};
  auto idf = idf_weights(tf, 4);
  EXPECT_NEAR(idf[0], 1.916291, 1e-6);
  EXPECT_NEAR(idf[0], std::log(5.0 / 2.0) + 1.0, 1e-15);
  EXPECT_EQ(idf[1], 1.0);
  SparseMatrix two;
  two.rows = 1;
  two.cols = 2;
  two.entries = {{0, 0, 1}, {0, 1, 1}};
  EXPECT_EQ(idf_weights(two, 2)[0], 1.0);
}

TEST(Tfidf, WorkedMicroExample) {
  auto m = build_tfidf({doc("d1", {"a", "a", "b"}), doc("d2", {"b"})}, 0.5);
  EXPECT_NEAR(m.idf[0], std::log(1.5) + 1.0, 1e-15);
  EXPECT_EQ(m.idf[1], 1.0);
  auto dense = m.matrix.to_dense();
  // Hand evaluation: raw column (2.810930, 1), norm sqrt(2.810930^2 + 1) = 2.983509.
  EXPECT_NEAR(dense(0, 0), 0.942156, 1e-6);
  EXPECT_NEAR(dense(1, 0), 0.335176, 1e-6);
  EXPECT_NEAR(dense.col(0).norm(), 1.0, 1e-15);
  EXPECT_EQ(dense(0, 1), 0.0);
  EXPECT_EQ(dense(1, 1), 1.0);
}

TEST(Tfidf, SingleTermDocumentIsExactlyOne) {
  auto m = build_tfidf({doc("1", {"a", "a", "a"}), doc("2", {"a", "b"})}, 0.5);
  EXPECT_EQ(m.matrix.to_dense()(0, 0), 1.0);
}

TEST(Tfidf, ZeroColumnStaysZero) {
  auto m = build_tfidf({doc("1", {"a"}), doc("2", {}), doc("3", {"a", "b"})}, 0.3);
  auto dense = m.matrix.to_dense();
  EXPECT_EQ(dense.col(1).squaredNorm(), 0.0);
  EXPECT_TRUE(dense.allFinite());
}

TEST(Tfidf, OracleOnRandomCorpora) {
  Rng rng(1234);
  for (int trial = 0; trial < 100; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 20, 50);
    const double frac = oracle::random_fraction(rng);
    std::size_t n_kept = 0;
    const auto expected = oracle::brute_force_tfidf(corpus, frac, n_kept);
    if (n_kept == 0) {
      EXPECT_THROW(build_tfidf(corpus, frac), EmptyVocabulary);
      continue;
    }
    const auto got = build_tfidf(corpus, frac).matrix.to_dense();
    ASSERT_EQ(static_cast<std::size_t>(got.rows()), expected.size());
    for (std::size_t i = 0; i < expected.size(); ++i)
      for (std::size_t j = 0; j < corpus.size(); ++j) ASSERT_NEAR(got(i, j), expected[i][j], 1e-12);
  }
}

TEST(Tfidf, ModelInvariants) {
  Rng rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    const auto corpus = oracle::random_corpus(rng, 20, 30);
    TfidfModel m;
    try {
      m = build_tfidf(corpus, 0.1);
    } catch (const EmptyVocabulary&) {
      continue;
    }
    for (std::size_t i = 0; i < m.idf.size(); ++i) {
      EXPECT_GE(m.idf[i], 1.0);
      EXPECT_EQ(m.idf[i] == 1.0, m.vocab.doc_freq[i] == m.n_docs);
      for (std::size_t j = 0; j < m.idf.size(); ++j)
        if (m.vocab.doc_freq[i] < m.vocab.doc_freq[j]) EXPECT_GT(m.idf[i], m.idf[j]);
    }
    const auto dense = m.matrix.to_dense();
    for (Eigen::Index c = 0; c < dense.cols(); ++c) {
      const double norm = dense.col(c).norm();
      if (norm != 0.0) EXPECT_NEAR(norm, 1.0, 1e-12);
    }
    // Entries sorted by (col, row) and unique.
    for (std::size_t e = 1; e < m.matrix.entries.size(); ++e) {
      const auto& p = m.matrix.entries[e - 1];
      const auto& q = m.matrix.entries[e];
      EXPECT_TRUE(p.col < q.col || (p.col == q.col && p.row < q.row));
    }
  }
}

TEST(SparseMatrix, ProductsMatchDense) {
  Rng rng(5);
  Eigen::MatrixXd a(7, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.uniform() < 0.4 ? rng.normal() : 0.0;
  const auto s = SparseMatrix::from_dense(a);
  EXPECT_EQ(s.to_dense(), a);
  Eigen::MatrixXd x(5, 3), y(7, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = rng.normal();
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = rng.normal();
  EXPECT_LT((s.multiply(x) - a * x).norm(), 1e-12);
  EXPECT_LT((s.multiply_transposed(y) - a.transpose() * y).norm(), 1e-12);
  EXPECT_NEAR(s.frobenius_norm(), a.norm(), 1e-12);
  const auto starts = s.column_starts();
  ASSERT_EQ(starts.size(), 6u);
  EXPECT_EQ(starts.back(), s.nnz());
}

TEST(MatrixCodec, BinaryAndTextRoundTrip) {
  auto m = build_tfidf({doc("1", {"a", "b", "a"}), doc("2", {"b", "c"}), doc("3", {})}, 0.3).matrix;
  const auto bytes = encode_matrix(m);
  EXPECT_EQ(bytes.substr(0, bytes.find('\n')), R"({"rows":3,"cols":3,"nnz":4})");
  EXPECT_EQ(bytes.size(), bytes.find('\n') + 1 + 16 * m.nnz());
  EXPECT_EQ(decode_matrix(bytes), m);
  EXPECT_EQ(decode_matrix_text(encode_matrix_text(m)), m);
  EXPECT_THROW(decode_matrix(bytes.substr(0, bytes.size() - 3)), Error);
}

TEST(SuggestPhrases, ThresholdAndRanking) {
  std::vector<TokenizedDoc> docs;
  for (int i = 0; i < 10; ++i) {
    std::vector<std::string> t{"seal", "leak"};
    if (i < 3) t = {"upper", "annular", "element", "leak"};
    if (i == 3) t = {"annular", "element"};
    docs.push_back(doc(std::to_string(i), t));
  }
  const auto found = suggest_phrases(docs, 3, 0.025);
  ASSERT_FALSE(found.empty());
  EXPECT_EQ(found[0], (PhraseCandidate{"seal leak", 6}));
  auto has = [&](const std::string& p, std::uint32_t df) {
    return std::find(found.begin(), found.end(), PhraseCandidate{p, df}) != found.end();
  };
  EXPECT_TRUE(has("annular element", 4));
  EXPECT_TRUE(has("upper annular element", 3));
  EXPECT_TRUE(has("upper annular", 3));
  for (std::size_t i = 1; i < found.size(); ++i) EXPECT_GE(found[i - 1].doc_freq, found[i].doc_freq);
  EXPECT_TRUE(suggest_phrases({}, 2, 0.025).empty());
  const auto bigrams = suggest_phrases(docs, 2, 0.35);
  for (const auto& c : bigrams) EXPECT_GE(c.doc_freq, 4u);
}
