#include "fcm/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "json.hpp"

namespace fcm::vectorize {

std::vector<std::size_t> SparseMatrix::column_starts() const {
  std::vector<std::size_t> starts(cols + 1, 0);
  for (const auto& e : entries) ++starts[e.col + 1];
  for (std::size_t j = 0; j < cols; ++j) starts[j + 1] += starts[j];
  return starts;
}

Eigen::MatrixXd SparseMatrix::to_dense() const {
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (const auto& e : entries) d(e.row, e.col) = e.value;
  return d;
}

SparseMatrix SparseMatrix::from_dense(const Eigen::MatrixXd& dense) {
  SparseMatrix m;
  m.rows = static_cast<std::size_t>(dense.rows());
  m.cols = static_cast<std::size_t>(dense.cols());
  for (Eigen::Index j = 0; j < dense.cols(); ++j)
    for (Eigen::Index i = 0; i < dense.rows(); ++i)
      if (dense(i, j) != 0.0)
        m.entries.push_back({static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j), dense(i, j)});
  return m;
}

Eigen::MatrixXd SparseMatrix::multiply(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != cols) throw std::invalid_argument("multiply: shape mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(rows), x.cols());
  for (const auto& e : entries) y.row(e.row) += e.value * x.row(e.col);
  return y;
}

Eigen::MatrixXd SparseMatrix::multiply_transposed(const Eigen::MatrixXd& x) const {
  if (static_cast<std::size_t>(x.rows()) != rows)
    throw std::invalid_argument("multiply_transposed: shape mismatch");
  Eigen::MatrixXd y = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cols), x.cols());
  for (const auto& e : entries) y.row(e.col) += e.value * x.row(e.row);
  return y;
}

double SparseMatrix::frobenius_norm() const {
  double s = 0.0;
  for (const auto& e : entries) s += e.value * e.value;
  return std::sqrt(s);
}

std::uint32_t min_doc_count(double fraction, std::size_t n_docs) {
  const double raw = fraction * static_cast<double>(n_docs);
  // Absorb representation error such as 0.1 * 30 = 3.0000000000000004.
  const double count = std::ceil(raw - 1e-9 * std::max(1.0, raw));
  return static_cast<std::uint32_t>(std::max(1.0, count));
}

Vocabulary build_vocabulary(const std::vector<preprocess::TokenizedDoc>& docs, double min_df_fraction) {
  if (!(min_df_fraction > 0.0 && min_df_fraction <= 1.0))
    throw Error(ErrorKind::usage, "InvalidMinDf", "min_df fraction must lie in (0, 1]");
  if (docs.empty()) throw Error(ErrorKind::data, "NoDocuments", "vocabulary needs at least one document");

  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : docs) {
    std::set<std::string_view> distinct(doc.tokens.begin(), doc.tokens.end());
    for (auto t : distinct) ++df[std::string(t)];
  }

  Vocabulary vocab;
  vocab.min_df_fraction = min_df_fraction;
  vocab.n_docs = docs.size();
  const auto threshold = min_doc_count(min_df_fraction, docs.size());
  for (const auto& [term, count] : df) {
    if (count < threshold) continue;
    vocab.index.emplace(term, static_cast<std::uint32_t>(vocab.terms.size()));
    vocab.terms.push_back(term);
    vocab.doc_freq.push_back(count);
  }
  if (vocab.terms.empty()) throw EmptyVocabulary();
  return vocab;
}

SparseMatrix term_frequency_matrix(const std::vector<preprocess::TokenizedDoc>& docs,
                                   const Vocabulary& vocab) {
  SparseMatrix tf;
  tf.rows = vocab.size();
  tf.cols = docs.size();
  std::map<std::uint32_t, double> counts;
  for (std::size_t j = 0; j < docs.size(); ++j) {
    counts.clear();
    for (const auto& t : docs[j].tokens)
      if (auto it = vocab.index.find(t); it != vocab.index.end()) counts[it->second] += 1.0;
    for (const auto& [row, count] : counts)
      tf.entries.push_back({row, static_cast<std::uint32_t>(j), count});
  }
  return tf;
}

std::vector<double> idf_weights(const SparseMatrix& tf, std::size_t n_docs) {
  if (n_docs == 0) throw std::invalid_argument("idf_weights: n_docs must be >= 1");
  std::vector<std::size_t> n(tf.rows, 0);
  for (const auto& e : tf.entries)
    if (e.value != 0.0) ++n[e.row];
  std::vector<double> idf(tf.rows);
  const double big_n = static_cast<double>(n_docs);
  for (std::size_t i = 0; i < tf.rows; ++i)
    idf[i] = std::log((1.0 + big_n) / (1.0 + static_cast<double>(n[i]))) + 1.0;
  return idf;
}

SparseMatrix tfidf_matrix(const SparseMatrix& tf, const std::vector<double>& idf) {
  if (idf.size() != tf.rows) throw std::invalid_argument("tfidf_matrix: idf length != rows");
  SparseMatrix w = tf;
  for (auto& e : w.entries) e.value *= idf[e.row];
  const auto starts = w.column_starts();
  for (std::size_t j = 0; j < w.cols; ++j) {
    double sq = 0.0;
    for (std::size_t p = starts[j]; p < starts[j + 1]; ++p) sq += w.entries[p].value * w.entries[p].value;
    if (sq == 0.0) continue;
    const double norm = std::sqrt(sq);
    for (std::size_t p = starts[j]; p < starts[j + 1]; ++p) w.entries[p].value /= norm;
  }
  return w;
}

TfidfModel build_tfidf(const std::vector<preprocess::TokenizedDoc>& docs, double min_df_fraction) {
  TfidfModel model;
  model.vocab = build_vocabulary(docs, min_df_fraction);
  model.n_docs = docs.size();
  const auto tf = term_frequency_matrix(docs, model.vocab);
  model.idf = idf_weights(tf, model.n_docs);
  model.matrix = tfidf_matrix(tf, model.idf);
  return model;
}

std::vector<PhraseCandidate> suggest_phrases(const std::vector<preprocess::TokenizedDoc>& docs,
                                             int max_n, double min_df_fraction) {
  if (max_n < 2 || max_n > 3) throw Error(ErrorKind::usage, "InvalidNgram", "max_n must be 2 or 3");
  if (docs.empty()) return {};
  std::map<std::string, std::uint32_t> df;
  for (const auto& doc : docs) {
    std::set<std::string> seen;
    const auto& t = doc.tokens;
    for (int n = 2; n <= max_n; ++n) {
      for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= t.size(); ++i) {
        std::string gram = t[i];
        for (int k = 1; k < n; ++k) gram += " " + t[i + static_cast<std::size_t>(k)];
        seen.insert(std::move(gram));
      }
    }
    for (const auto& g : seen) ++df[g];
  }
  const auto threshold = min_doc_count(min_df_fraction, docs.size());
  std::vector<PhraseCandidate> out;
  for (const auto& [phrase, count] : df)
    if (count >= threshold) out.push_back({phrase, count});
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.doc_freq > b.doc_freq; });
  return out;
}

std::string encode_matrix(const SparseMatrix& m) {
  nlohmann::ordered_json header{{"rows", m.rows}, {"cols", m.cols}, {"nnz", m.nnz()}};
  std::string out = header.dump();
  out.push_back('\n');
  out.reserve(out.size() + m.nnz() * 16);
  for (const auto& e : m.entries) {
    io::append_u32_le(out, e.row);
    io::append_u32_le(out, e.col);
    io::append_f64_le(out, e.value);
  }
  return out;
}

SparseMatrix decode_matrix(const std::string& bytes) {
  const auto nl = bytes.find('\n');
  if (nl == std::string::npos) throw Error(ErrorKind::data, "BadMatrix", "matrix header missing");
  const auto header = nlohmann::json::parse(bytes.substr(0, nl));
  SparseMatrix m;
  m.rows = header.at("rows").get<std::size_t>();
  m.cols = header.at("cols").get<std::size_t>();
  const auto nnz = header.at("nnz").get<std::size_t>();
  if (bytes.size() - nl - 1 != nnz * 16) throw Error(ErrorKind::data, "BadMatrix", "triplet stream length mismatch");
  const char* p = bytes.data() + nl + 1;
  m.entries.resize(nnz);
  for (auto& e : m.entries) {
    e.row = io::read_u32_le(p);
    e.col = io::read_u32_le(p + 4);
    e.value = io::read_f64_le(p + 8);
    p += 16;
    if (e.row >= m.rows || e.col >= m.cols) throw Error(ErrorKind::data, "BadMatrix", "triplet index out of range");
  }
  return m;
}

std::string encode_matrix_text(const SparseMatrix& m) {
  std::string out = std::to_string(m.rows) + " " + std::to_string(m.cols) + " " + std::to_string(m.nnz()) + "\n";
  for (const auto& e : m.entries)
    out += std::to_string(e.row) + " " + std::to_string(e.col) + " " + io::format_double(e.value) + "\n";
  return out;
}

SparseMatrix decode_matrix_text(const std::string& text) {
  std::istringstream in(text);
  SparseMatrix m;
  std::size_t nnz = 0;
  if (!(in >> m.rows >> m.cols >> nnz)) throw Error(ErrorKind::data, "BadMatrix", "bad text matrix header");
  m.entries.resize(nnz);
  for (auto& e : m.entries)
    if (!(in >> e.row >> e.col >> e.value)) throw Error(ErrorKind::data, "BadMatrix", "truncated text matrix");
  return m;
}

}  // namespace fcm::vectorize
