#pragma once

#include <cstdint>
#include <filesystem>

#include <Eigen/Dense>

#include "fcm/vectorize.hpp"

namespace fcm::svd {

/// A = G * diag(s) * D^T with orthonormal columns in G and D.
struct SvdFactors {
  Eigen::MatrixXd g;  // t x m, left singular vectors
  Eigen::VectorXd s;  // m singular values, descending
  Eigen::MatrixXd d;  // d x m, right singular vectors
  std::size_t m = 0;
  /// Set by the truncated path when the numerical rank fell short of the request.
  bool rank_deficient = false;
  int iterations = 0;
};

struct Options {
  /// Largest min(rows, cols) the dense path accepts.
  std::size_t dense_cap = 1024;
  int max_sweeps = 60;
  int oversampling = 10;
  int power_iterations = 4;
  /// Subspace-iteration cap once the minimum power iterations are done.
  int max_iterations = 1000;
  /// Stop iterating once the top-k Ritz values move less than this, relative to s_1.
  double ritz_tolerance = 1e-10;
  /// Singular values below this fraction of s_1 are set to zero.
  double zero_threshold = 1e-12;
};

/// Full factorization by one-sided (Hestenes) Jacobi; m = min(rows, cols).
/// Throws NoConvergence after `max_sweeps` sweeps.
SvdFactors svd_exact(const Eigen::MatrixXd& a, const Options& options = {});

/// Top-k factors by seeded randomized subspace iteration. When the numerical
/// rank r is below k, returns r factors with `rank_deficient` set.
SvdFactors svd_truncated(const vectorize::SparseMatrix& a, std::size_t k, std::uint64_t seed,
                         const Options& options = {});

/// First k columns / values only.
SvdFactors truncate(const SvdFactors& f, std::size_t k);

/// Count of singular values above the zero threshold.
std::size_t numerical_rank(const Eigen::VectorXd& s);

/// ||A - G_k diag(s_k) D_k^T||_F.
double reconstruction_error(const Eigen::MatrixXd& a, const SvdFactors& f, std::size_t k);
double reconstruction_error(const vectorize::SparseMatrix& a, const SvdFactors& f, std::size_t k);

/// Orthonormal basis of the column space of `y`, same shape. Columns that
/// collapse are replaced by random directions drawn from `rng_seed`.
Eigen::MatrixXd orthonormalize(const Eigen::MatrixXd& y, std::uint64_t rng_seed);

/// Writes manifest.json plus column-major little-endian g.f64, s.f64, d.f64.
void write_factors(const SvdFactors& f, const std::filesystem::path& dir);
SvdFactors read_factors(const std::filesystem::path& dir);

}  // namespace fcm::svd
