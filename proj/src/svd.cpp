#include "fcm/svd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "fcm/error.hpp"
#include "fcm/io_util.hpp"
#include "fcm/random.hpp"
#include "json.hpp"

namespace fcm::svd {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Gram-Schmidt with one reorthogonalization pass against the first `j` columns.
// Returns the norm left after projection.
double project_out(const MatrixXd& q, Index j, VectorXd& v) {
  for (int pass = 0; pass < 2; ++pass) {
    if (j > 0) v -= q.leftCols(j) * (q.leftCols(j).transpose() * v);
  }
  return v.norm();
}

// Completes the columns of `q` flagged in `missing` to an orthonormal set,
// trying canonical basis vectors in order.
void complete_basis(MatrixXd& q, const std::vector<bool>& missing) {
  const Index n = q.rows();
  Index next_basis = 0;
  for (Index j = 0; j < q.cols(); ++j) {
    if (!missing[static_cast<std::size_t>(j)]) continue;
    // Only the already-final columns are projected out, so process in order and
    // keep a running list of valid columns.
    MatrixXd valid(n, 0);
    for (Index c = 0; c < q.cols(); ++c)
      if (c < j || !missing[static_cast<std::size_t>(c)]) {
        valid.conservativeResize(n, valid.cols() + 1);
        valid.col(valid.cols() - 1) = q.col(c);
      }
    while (next_basis < n) {
      VectorXd v = VectorXd::Unit(n, next_basis++);
      const double rest = project_out(valid, valid.cols(), v);
      if (rest > 1e-8) {
        q.col(j) = v / rest;
        break;
      }
    }
  }
}

struct Jacobi {
  MatrixXd u;  // rows >= cols, columns become sigma_i * u_i
  MatrixXd v;  // accumulated rotations
  int sweeps = 0;
};

Jacobi one_sided_jacobi(MatrixXd w, int max_sweeps) {
  const Index n = w.cols();
  Jacobi out{std::move(w), MatrixXd::Identity(n, n), 0};
  MatrixXd& u = out.u;
  MatrixXd& v = out.v;
  const double tol = std::max<double>(1e-15, static_cast<double>(u.rows()) * std::numeric_limits<double>::epsilon());

  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = u.col(p).squaredNorm();
        const double beta = u.col(q).squaredNorm();
        const double gamma = u.col(p).dot(u.col(q));
        if (gamma == 0.0 || std::abs(gamma) <= tol * std::sqrt(alpha * beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (Index i = 0; i < u.rows(); ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (Index i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
    out.sweeps = sweep;
    if (!rotated) return out;
  }
  throw NoConvergence(max_sweeps);
}

}  // namespace

std::size_t numerical_rank(const VectorXd& s) {
  std::size_t r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > 0.0) ++r;
  return r;
}

SvdFactors svd_exact(const MatrixXd& a, const Options& options) {
  const Index rows = a.rows(), cols = a.cols();
  const Index m = std::min(rows, cols);
  if (static_cast<std::size_t>(m) > options.dense_cap)
    throw Error(ErrorKind::usage, "DenseCapExceeded",
                "min(rows, cols) = " + std::to_string(m) + " exceeds the dense cap; use the iterative path");

  SvdFactors f;
  f.m = static_cast<std::size_t>(m);
  if (m == 0) {
    f.g = MatrixXd(rows, 0);
    f.d = MatrixXd(cols, 0);
    f.s = VectorXd(0);
    return f;
  }

  const bool transposed = rows < cols;
  Jacobi jac = one_sided_jacobi(transposed ? MatrixXd(a.transpose()) : a, options.max_sweeps);
  f.iterations = jac.sweeps;

  // Sort by column norm, descending; ties keep the original order.
  VectorXd norms(m);
  for (Index j = 0; j < m; ++j) norms(j) = jac.u.col(j).norm();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Index x, Index y) { return norms(x) > norms(y); });

  const Index n_rows = jac.u.rows();
  MatrixXd left(n_rows, m), right(m, m);
  VectorXd s(m);
  const double s1 = norms(order[0]);
  std::vector<bool> missing(static_cast<std::size_t>(m), false);
  for (Index j = 0; j < m; ++j) {
    const Index src = order[static_cast<std::size_t>(j)];
    double sigma = norms(src);
    if (sigma <= options.zero_threshold * s1) sigma = 0.0;
    s(j) = sigma;
    right.col(j) = jac.v.col(src);
    if (sigma > 0.0) {
      left.col(j) = jac.u.col(src) / norms(src);
    } else {
      left.col(j).setZero();
      missing[static_cast<std::size_t>(j)] = true;
    }
  }
  // Tiny singular values leave their columns only loosely orthogonal; one
  // Gram-Schmidt pass in descending order restores it without touching the
  // well-determined leading directions.
  for (Index j = 0; j < m; ++j) {
    if (missing[static_cast<std::size_t>(j)]) continue;
    VectorXd col = left.col(j);
    const double rest = project_out(left, j, col);
    if (rest > 0.0) left.col(j) = col / rest;
  }
  complete_basis(left, missing);

  f.s = std::move(s);
  if (transposed) {
    f.g = std::move(right);
    f.d = std::move(left);
  } else {
    f.g = std::move(left);
    f.d = std::move(right);
  }
  return f;
}

MatrixXd orthonormalize(const MatrixXd& y, std::uint64_t rng_seed) {
  MatrixXd q = y;
  Rng rng(rng_seed);
  for (Index j = 0; j < q.cols(); ++j) {
    VectorXd v = q.col(j);
    const double original = v.norm();
    double rest = project_out(q, j, v);
    int attempts = 0;
    while (!(rest > 1e-10 * std::max(original, 1e-300)) || rest == 0.0) {
      if (++attempts > 8) throw NoConvergence(attempts);
      for (Index i = 0; i < v.size(); ++i) v(i) = rng.normal();
      const double fresh = v.norm();
      rest = project_out(q, j, v);
      if (rest > 1e-10 * fresh) break;
    }
    q.col(j) = v / rest;
  }
  return q;
}

SvdFactors truncate(const SvdFactors& f, std::size_t k) {
  k = std::min(k, f.m);
  SvdFactors out;
  const auto kk = static_cast<Index>(k);
  out.g = f.g.leftCols(kk);
  out.s = f.s.head(kk);
  out.d = f.d.leftCols(kk);
  out.m = k;
  out.rank_deficient = f.rank_deficient;
  out.iterations = f.iterations;
  return out;
}

SvdFactors svd_truncated(const vectorize::SparseMatrix& a, std::size_t k, std::uint64_t seed,
                         const Options& options) {
  const std::size_t full = std::min(a.rows, a.cols);
  if (k < 1 || k > full)
    throw Error(ErrorKind::usage, "InvalidRank",
                "k=" + std::to_string(k) + " must lie in [1, " + std::to_string(full) + "]");
  const auto width = static_cast<Index>(std::min(full, k + static_cast<std::size_t>(options.oversampling)));
  const auto kk = static_cast<Index>(k);

  Rng rng(seed);
  MatrixXd omega(static_cast<Index>(a.cols), width);
  for (Index j = 0; j < omega.cols(); ++j)
    for (Index i = 0; i < omega.rows(); ++i) omega(i, j) = rng.normal();

  // Each orthonormalization draws replacement directions from its own seed stream.
  std::uint64_t stream = seed;
  auto next_seed = [&] { return stream = stream * 6364136223846793005ULL + 1442695040888963407ULL; };

  MatrixXd q = orthonormalize(a.multiply(omega), next_seed());
  VectorXd previous;
  SvdFactors small;
  int it = 0;
  const int limit = options.power_iterations + options.max_iterations;
  bool converged = false;
  while (true) {
    // B^T = A^T Q; its singular values are the current Ritz values.
    MatrixXd bt = a.multiply_transposed(q);
    if (it >= options.power_iterations) {
      small = svd_exact(bt, options);
      const VectorXd ritz = small.s.head(kk);
      if (previous.size() == kk) {
        const double scale = std::max(ritz(0), std::numeric_limits<double>::min());
        if ((ritz - previous).cwiseAbs().maxCoeff() <= options.ritz_tolerance * scale) {
          converged = true;
        }
      }
      // A full-width basis already spans the range of A.
      if (static_cast<std::size_t>(width) == full) converged = true;
      previous = ritz;
    }
    if (converged) break;
    if (++it > limit) throw NoConvergence(limit);
    MatrixXd z = orthonormalize(bt, next_seed());
    q = orthonormalize(a.multiply(z), next_seed());
  }

  // Q^T A = (B^T)^T = V_b S U_b^T  =>  A ~ (Q V_b) S U_b^T.
  SvdFactors f;
  f.iterations = it;
  const std::size_t rank = numerical_rank(small.s.head(kk));
  f.rank_deficient = rank < k;
  const auto r = static_cast<Index>(rank);
  f.m = rank;
  f.s = small.s.head(r);
  // `small` factors B^T (d x l): its left vectors live in document space.
  f.g = q * small.d.leftCols(r);
  f.d = small.g.leftCols(r);
  return f;
}

double reconstruction_error(const MatrixXd& a, const SvdFactors& f, std::size_t k) {
  if (k > f.m) throw KTooLarge(k, f.m);
  const auto kk = static_cast<Index>(k);
  MatrixXd approx = f.g.leftCols(kk) * f.s.head(kk).asDiagonal() * f.d.leftCols(kk).transpose();
  return (a - approx).norm();
}

double reconstruction_error(const vectorize::SparseMatrix& a, const SvdFactors& f, std::size_t k) {
  return reconstruction_error(a.to_dense(), f, k);
}

namespace {

std::string encode_dense(const MatrixXd& m) {
  std::string out;
  out.reserve(static_cast<std::size_t>(m.size()) * 8);
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) io::append_f64_le(out, m(i, j));
  return out;
}

MatrixXd decode_dense(const std::string& bytes, Index rows, Index cols) {
  if (bytes.size() != static_cast<std::size_t>(rows * cols) * 8)
    throw Error(ErrorKind::data, "BadFactors", "array length does not match declared shape");
  MatrixXd m(rows, cols);
  const char* p = bytes.data();
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i, p += 8) m(i, j) = io::read_f64_le(p);
  return m;
}

}  // namespace

void write_factors(const SvdFactors& f, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest{
      {"format", "f64-le column-major"},
      {"m", f.m},
      {"rank_deficient", f.rank_deficient},
      {"g", {{"file", "g.f64"}, {"shape", {f.g.rows(), f.g.cols()}}}},
      {"s", {{"file", "s.f64"}, {"shape", {f.s.size()}}}},
      {"d", {{"file", "d.f64"}, {"shape", {f.d.rows(), f.d.cols()}}}},
  };
  io::write_file_atomic(dir / "g.f64", encode_dense(f.g));
  io::write_file_atomic(dir / "s.f64", encode_dense(f.s));
  io::write_file_atomic(dir / "d.f64", encode_dense(f.d));
  io::write_file_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
}

SvdFactors read_factors(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
  SvdFactors f;
  f.m = manifest.at("m").get<std::size_t>();
  f.rank_deficient = manifest.at("rank_deficient").get<bool>();
  auto shape = [&](const char* key, std::size_t i) { return manifest.at(key).at("shape").at(i).get<Index>(); };
  f.g = decode_dense(io::read_file(dir / "g.f64"), shape("g", 0), shape("g", 1));
  f.s = decode_dense(io::read_file(dir / "s.f64"), shape("s", 0), 1);
  f.d = decode_dense(io::read_file(dir / "d.f64"), shape("d", 0), shape("d", 1));
  if (static_cast<std::size_t>(f.s.size()) != f.m || static_cast<std::size_t>(f.g.cols()) != f.m ||
      static_cast<std::size_t>(f.d.cols()) != f.m)
    throw Error(ErrorKind::data, "BadFactors", "factor shapes disagree with m");
  return f;
}

}  // namespace fcm::svd
