#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include "fcm/error.hpp"
#include "fcm/random.hpp"
#include "fcm/svd.hpp"
#include "test_util.hpp"

using namespace fcm;
using namespace fcm::svd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
  MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a;
}

double ortho_residual(const MatrixXd& q) {
  return (q.transpose() * q - MatrixXd::Identity(q.cols(), q.cols())).cwiseAbs().maxCoeff();
}

MatrixXd rebuild(const SvdFactors& f) { return f.g * f.s.asDiagonal() * f.d.transpose(); }

}  // namespace

TEST(SvdExact, Diagonal) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 2;
  auto f = svd_exact(a);
  EXPECT_NEAR(f.s(0), 3, 1e-14);
  EXPECT_NEAR(f.s(1), 2, 1e-14);
  EXPECT_NEAR(f.g.cwiseAbs().diagonal().sum(), 2.0, 1e-14);
  EXPECT_NEAR(f.d.cwiseAbs().diagonal().sum(), 2.0, 1e-14);
}

TEST(SvdExact, RankOneOnes) {
  MatrixXd a = MatrixXd::Ones(2, 2);
  auto f = svd_exact(a);
  EXPECT_NEAR(f.s(0), 2.0, 1e-14);
  EXPECT_EQ(f.s(1), 0.0);  // clamped
  EXPECT_LT(ortho_residual(f.g), 1e-12);
  EXPECT_LT(ortho_residual(f.d), 1e-12);
  EXPECT_LT((rebuild(f) - a).norm(), 1e-12);
}

TEST(SvdExact, Identity) {
  auto f = svd_exact(MatrixXd::Identity(6, 6));
  for (int i = 0; i < 6; ++i) EXPECT_NEAR(f.s(i), 1.0, 1e-15);
}

TEST(SvdExact, ZeroMatrix) {
  auto f = svd_exact(MatrixXd::Zero(4, 3));
  EXPECT_EQ(f.m, 3u);
  EXPECT_EQ(f.s.norm(), 0.0);
  EXPECT_LT(ortho_residual(f.g), 1e-12);
  EXPECT_LT(ortho_residual(f.d), 1e-12);
  EXPECT_EQ(numerical_rank(f.s), 0u);
}

TEST(SvdExact, RandomProperties) {
  Rng rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const auto r = static_cast<Eigen::Index>(1 + rng.below(24));
    const auto c = static_cast<Eigen::Index>(1 + rng.below(24));
    const MatrixXd a = random_matrix(rng, r, c);
    const auto f = svd_exact(a);
    ASSERT_EQ(f.m, static_cast<std::size_t>(std::min(r, c)));
    EXPECT_LE(ortho_residual(f.g), 1e-8);
    EXPECT_LE(ortho_residual(f.d), 1e-8);
    EXPECT_LE((rebuild(f) - a).norm(), 1e-8 * std::max(1.0, a.norm()));
    for (Eigen::Index i = 1; i < f.s.size(); ++i) EXPECT_GE(f.s(i - 1), f.s(i));
    EXPECT_GE(f.s.minCoeff(), 0.0);

    // Independent oracle: eigenvalues of A^T A (or A A^T, whichever is smaller).
    const MatrixXd gram = c <= r ? MatrixXd(a.transpose() * a) : MatrixXd(a * a.transpose());
    Eigen::SelfAdjointEigenSolver<MatrixXd> eig(gram);
    VectorXd ev = eig.eigenvalues().reverse().cwiseMax(0.0).cwiseSqrt();
    for (Eigen::Index i = 0; i < ev.size(); ++i) EXPECT_NEAR(f.s(i), ev(i), 1e-8 * f.s(0));

    for (std::size_t k = 0; k <= f.m; ++k) {
      const double tail = f.s.tail(static_cast<Eigen::Index>(f.m - k)).squaredNorm();
      const double err = reconstruction_error(a, f, k);
      EXPECT_NEAR(err * err, tail, 1e-8 * std::max(tail, 1e-8 * a.squaredNorm()));
    }
  }
}

TEST(SvdExact, ScaleEquivarianceAndTranspose) {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXd a = random_matrix(rng, 9, 6);
    const auto f = svd_exact(a);
    const auto scaled = svd_exact(3.5 * a);
    EXPECT_LT((scaled.s - 3.5 * f.s).norm(), 1e-12 * scaled.s(0));
    for (Eigen::Index c = 0; c < 6; ++c)
      EXPECT_NEAR(std::abs(scaled.d.col(c).dot(f.d.col(c))), 1.0, 1e-8);
    const auto t = svd_exact(a.transpose());
    EXPECT_LT((t.s - f.s).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(SvdExact, SweepCap) {
  Rng rng(1);
  Options o;
  o.max_sweeps = 1;
  EXPECT_THROW(svd_exact(random_matrix(rng, 30, 30), o), NoConvergence);
}

TEST(ReconstructionError, DiagonalAndDense) {
  MatrixXd a = MatrixXd::Zero(2, 2);
  a(0, 0) = 3;
  a(1, 1) = 2;
  EXPECT_NEAR(reconstruction_error(a, svd_exact(a), 1), 2.0, 1e-14);
  EXPECT_NEAR(reconstruction_error(a, svd_exact(a), 2), 0.0, 1e-14);

  Rng rng(8);
  const MatrixXd b = random_matrix(rng, 8, 6);
  const auto f = svd_exact(b);
  for (std::size_t k = 0; k <= 6; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    const MatrixXd approx = f.g.leftCols(kk) * f.s.head(kk).asDiagonal() * f.d.leftCols(kk).transpose();
    EXPECT_NEAR(reconstruction_error(b, f, k), (b - approx).norm(), 1e-10);
    EXPECT_NEAR(reconstruction_error(b, f, k), f.s.tail(6 - kk).norm(), 1e-10);
    EXPECT_NEAR(reconstruction_error(vectorize::SparseMatrix::from_dense(b), f, k), f.s.tail(6 - kk).norm(), 1e-10);
  }
}

TEST(SvdTruncated, MatchesExact) {
  Rng rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = static_cast<Eigen::Index>(5 + rng.below(40));
    const auto c = static_cast<Eigen::Index>(5 + rng.below(40));
    const MatrixXd a = random_matrix(rng, r, c);
    const auto exact = svd_exact(a);
    const std::size_t k = 1 + rng.below(std::min<std::size_t>(exact.m, 12));
    const auto t = svd_truncated(vectorize::SparseMatrix::from_dense(a), k, 42);
    ASSERT_EQ(t.m, k);
    for (std::size_t i = 0; i < k; ++i)
      EXPECT_NEAR(t.s(static_cast<Eigen::Index>(i)), exact.s(static_cast<Eigen::Index>(i)), 1e-6 * exact.s(0));
    EXPECT_LE(ortho_residual(t.g), 1e-8);
    EXPECT_LE(ortho_residual(t.d), 1e-8);
  }
}

TEST(SvdTruncated, FullRankMatchesExact) {
  Rng rng(4);
  const MatrixXd a = random_matrix(rng, 12, 7);
  const auto exact = svd_exact(a);
  const auto t = svd_truncated(vectorize::SparseMatrix::from_dense(a), 7, 9);
  EXPECT_LT((t.s - exact.s).cwiseAbs().maxCoeff(), 1e-6 * exact.s(0));
  EXPECT_LT((rebuild(t) - a).norm(), 1e-8 * a.norm());
}

TEST(SvdTruncated, RankOne) {
  VectorXd u(5), v(4);
  u << 1, -2, 0.5, 3, 1;
  v << 2, 0, -1, 1;
  const MatrixXd a = u * v.transpose();
  const auto t = svd_truncated(vectorize::SparseMatrix::from_dense(a), 1, 42);
  EXPECT_NEAR(t.s(0), u.norm() * v.norm(), 1e-12 * u.norm() * v.norm());
}

TEST(SvdTruncated, RankDeficientReturnsFewerFactors) {
  VectorXd u(6), v(5);
  u << 1, 2, 3, 4, 5, 6;
  v << 1, -1, 1, -1, 2;
  const MatrixXd a = u * v.transpose();
  const auto t = svd_truncated(vectorize::SparseMatrix::from_dense(a), 3, 42);
  EXPECT_EQ(t.m, 1u);
  EXPECT_TRUE(t.rank_deficient);
  EXPECT_EQ(t.g.cols(), 1);
}

TEST(SvdTruncated, SameSeedBitwiseIdentical) {
  Rng rng(12);
  const auto a = vectorize::SparseMatrix::from_dense(random_matrix(rng, 40, 30));
  const auto x = svd_truncated(a, 5, 42), y = svd_truncated(a, 5, 42);
  EXPECT_EQ(x.g, y.g);
  EXPECT_EQ(x.s, y.s);
  EXPECT_EQ(x.d, y.d);
}

TEST(Orthonormalize, HandlesCollapsedColumns) {
  MatrixXd y(5, 3);
  y.col(0) << 1, 2, 3, 4, 5;
  y.col(1) = 2 * y.col(0);
  y.col(2) << 0, 1, 0, 1, 0;
  const auto q = orthonormalize(y, 3);
  EXPECT_LT(ortho_residual(q), 1e-12);
  EXPECT_NEAR(std::abs(q.col(0).dot(y.col(0).normalized())), 1.0, 1e-12);
}

TEST(FactorsIo, RoundTrip) {
  fcm::testing::TempDir tmp;
  Rng rng(6);
  const auto f = svd_exact(random_matrix(rng, 7, 4));
  write_factors(f, tmp / "factors");
  const auto g = read_factors(tmp / "factors");
  EXPECT_EQ(g.m, f.m);
  EXPECT_EQ(g.g, f.g);
  EXPECT_EQ(g.s, f.s);
  EXPECT_EQ(g.d, f.d);
}
