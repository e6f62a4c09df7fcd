#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "fcm/preprocess.hpp"

namespace fcm::vectorize {

/// Terms kept by the document-frequency rule, in lexicographic order.
struct Vocabulary {
  std::vector<std::string> terms;
  std::unordered_map<std::string, std::uint32_t> index;
  std::vector<std::uint32_t> doc_freq;  // n_i: documents containing term i
  double min_df_fraction = 1.0;
  std::size_t n_docs = 0;

  std::size_t size() const { return terms.size(); }
};

struct Triplet {
  std::uint32_t row;
  std::uint32_t col;
  double value;
  bool operator==(const Triplet&) const = default;
};

/// Coordinate-format term x document matrix, entries sorted by (col, row).
struct SparseMatrix {
  std::size_t rows = 0;  // terms
  std::size_t cols = 0;  // documents
  std::vector<Triplet> entries;

  std::size_t nnz() const { return entries.size(); }
  /// Offsets into `entries` where each column starts (size cols + 1).
  std::vector<std::size_t> column_starts() const;
  Eigen::MatrixXd to_dense() const;
  static SparseMatrix from_dense(const Eigen::MatrixXd& dense);
  /// A * x for a block of column vectors.
  Eigen::MatrixXd multiply(const Eigen::MatrixXd& x) const;
  /// A^T * x.
  Eigen::MatrixXd multiply_transposed(const Eigen::MatrixXd& x) const;
  double frobenius_norm() const;

  bool operator==(const SparseMatrix&) const = default;
};

struct TfidfModel {
  Vocabulary vocab;
  SparseMatrix matrix;
  std::vector<double> idf;
  std::size_t n_docs = 0;
};

/// Smallest document count meeting `fraction` of `n_docs`.
std::uint32_t min_doc_count(double fraction, std::size_t n_docs);

/// Keeps tokens present in at least ceil(fraction * N) distinct documents.
/// Throws EmptyVocabulary when none survive.
Vocabulary build_vocabulary(const std::vector<preprocess::TokenizedDoc>& docs, double min_df_fraction);

/// Raw counts; out-of-vocabulary tokens are ignored.
SparseMatrix term_frequency_matrix(const std::vector<preprocess::TokenizedDoc>& docs,
                                   const Vocabulary& vocab);

/// idf_i = ln((1 + N) / (1 + n_i)) + 1.
std::vector<double> idf_weights(const SparseMatrix& tf, std::size_t n_docs);

/// tf * idf, then each nonzero document column scaled to unit Euclidean norm.
SparseMatrix tfidf_matrix(const SparseMatrix& tf, const std::vector<double>& idf);

TfidfModel build_tfidf(const std::vector<preprocess::TokenizedDoc>& docs, double min_df_fraction);

struct PhraseCandidate {
  std::string phrase;  // space-separated words
  std::uint32_t doc_freq = 0;
  bool operator==(const PhraseCandidate&) const = default;
};

/// Contiguous 2..max_n-grams meeting the document-frequency threshold, ranked by
/// document frequency (ties lexicographic). Input should not be phrase-merged.
std::vector<PhraseCandidate> suggest_phrases(const std::vector<preprocess::TokenizedDoc>& docs,
                                             int max_n, double min_df_fraction);

// Matrix interchange: a JSON header line {"rows","cols","nnz"} followed by
// little-endian (u32 row, u32 col, f64 value) triplets.
std::string encode_matrix(const SparseMatrix& m);
SparseMatrix decode_matrix(const std::string& bytes);
/// Debug form: "rows cols nnz" then one "row col value" line per entry.
std::string encode_matrix_text(const SparseMatrix& m);
SparseMatrix decode_matrix_text(const std::string& text);

}  // namespace fcm::vectorize
