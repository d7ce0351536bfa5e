#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "chebgd/errors.hpp"
#include "chebgd/rng.hpp"

namespace chebgd {

using Vector = std::vector<double>;

namespace linalg {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }
};

inline double dot(const Vector& a, const Vector& b) {
  if (a.size() != b.size())
    throw DimensionMismatch("dot: vector sizes " + std::to_string(a.size()) +
                            " vs " + std::to_string(b.size()));
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vector& a) { return std::sqrt(dot(a, a)); }

inline Vector matvec(const Matrix& m, const Vector& x) {
  if (m.cols != x.size())
    throw DimensionMismatch("matvec: matrix is " + std::to_string(m.rows) + "x" +
                            std::to_string(m.cols) + ", vector has " +
                            std::to_string(x.size()));
  Vector y(m.rows, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = &m.data[i * m.cols];
    double s = 0.0;
    for (std::size_t j = 0; j < m.cols; ++j) s += row[j] * x[j];
    y[i] = s;
  }
  return y;
}

/// y = m^T x for an m.rows-vector x.
inline Vector matvec_transposed(const Matrix& m, const Vector& x) {
  if (m.rows != x.size())
    throw DimensionMismatch("matvec_transposed: matrix is " + std::to_string(m.rows) +
                            "x" + std::to_string(m.cols) + ", vector has " +
                            std::to_string(x.size()));
  Vector y(m.cols, 0.0);
  for (std::size_t i = 0; i < m.rows; ++i) {
    const double* row = &m.data[i * m.cols];
    const double xi = x[i];
    for (std::size_t j = 0; j < m.cols; ++j) y[j] += row[j] * xi;
  }
  return y;
}

inline double max_abs(const Matrix& m) {
  double v = 0.0;
  for (double x : m.data) v = std::max(v, std::abs(x));
  return v;
}

/// A = H^T H + eta*I, built column-block by column-block.
inline Matrix gram(const Matrix& h, double eta = 0.0) {
  Matrix a(h.cols, h.cols);
  for (std::size_t i = 0; i < h.rows; ++i) {
    const double* row = &h.data[i * h.cols];
    for (std::size_t j = 0; j < h.cols; ++j) {
      const double hij = row[j];
      if (hij == 0.0) continue;
      double* out = &a.data[j * a.cols];
      for (std::size_t k = j; k < h.cols; ++k) out[k] += hij * row[k];
    }
  }
  for (std::size_t j = 0; j < a.rows; ++j)
    for (std::size_t k = 0; k < j; ++k) a(j, k) = a(k, j);
  for (std::size_t j = 0; j < a.rows; ++j) a(j, j) += eta;
  return a;
}

/// Symmetric positive definite quadratic problem min x^T A x / 2 - b^T x.
///
/// Holds A (optionally as Gram factor H with A = H^T H + eta*I) and the
/// right-hand side `target` (zero for the canonical x_opt = 0 problem).
/// Immutable after construction; safe to share across threads.
class QuadraticProblem {
 public:
  static QuadraticProblem from_matrix(Matrix a, double ridge_eta = 0.0,
                                      Vector target = {}) {
    check_square_symmetric(a);
    return QuadraticProblem(std::move(a), std::nullopt, ridge_eta, std::move(target));
  }

  static QuadraticProblem from_gram_factor(Matrix h, double ridge_eta = 0.0,
                                           Vector target = {}) {
    if (ridge_eta < 0.0) throw InvalidParams("ridge_eta must be nonnegative");
    Matrix a = gram(h, ridge_eta);
    return QuadraticProblem(std::move(a), std::move(h), ridge_eta, std::move(target));
  }

  std::size_t dim() const { return a_.rows; }
  const Matrix& matrix_a() const { return a_; }
  const std::optional<Matrix>& factor_h() const { return h_; }
  double ridge_eta() const { return eta_; }
  const Vector& target() const { return target_; }

  Vector apply(const Vector& x) const { return matvec(a_, x); }

  /// max-norm residual of the factor identity ||H^T H + eta I - A||_max.
  double factor_residual() const {
    if (!h_) return 0.0;
    Matrix rebuilt = gram(*h_, eta_);
    double r = 0.0;
    for (std::size_t i = 0; i < a_.data.size(); ++i)
      r = std::max(r, std::abs(rebuilt.data[i] - a_.data[i]));
    return r;
  }

 private:
  QuadraticProblem(Matrix a, std::optional<Matrix> h, double eta, Vector target)
      : a_(std::move(a)), h_(std::move(h)), eta_(eta), target_(std::move(target)) {
    if (a_.rows == 0) throw InvalidParams("problem dimension must be positive");
    if (target_.empty()) target_.assign(a_.rows, 0.0);
    if (target_.size() != a_.rows)
      throw DimensionMismatch("target size does not match problem dimension");
    if (h_ && h_->cols != a_.rows)
      throw DimensionMismatch("factor H has wrong column count");
    if (h_ && factor_residual() >= 1e-10 * std::max(max_abs(a_), 1e-300))
      throw InvalidParams("factor H does not reproduce A");
  }

  static void check_square_symmetric(const Matrix& a) {
    if (a.rows != a.cols) throw DimensionMismatch("matrix A must be square");
    const double scale = std::max(max_abs(a), 1e-300);
    for (std::size_t i = 0; i < a.rows; ++i)
      for (std::size_t j = i + 1; j < a.cols; ++j)
        if (std::abs(a(i, j) - a(j, i)) > 1e-12 * scale)
          throw InvalidParams("matrix A is not symmetric within 1e-12 relative");
  }

  Matrix a_;
  std::optional<Matrix> h_;
  double eta_;
  Vector target_;
};

/// Ascending eigenvalues of a positive definite matrix.
class Spectrum {
 public:
  explicit Spectrum(std::vector<double> eigenvalues)
      : eigenvalues_(std::move(eigenvalues)) {
    if (eigenvalues_.empty()) throw InvalidParams("spectrum must be nonempty");
    if (!std::is_sorted(eigenvalues_.begin(), eigenvalues_.end()))
      throw InvalidParams("eigenvalues must be sorted ascending");
    if (eigenvalues_.front() <= 0.0)
      throw InvalidParams("spectrum must be strictly positive");
  }

  const std::vector<double>& eigenvalues() const { return eigenvalues_; }
  double lambda_min() const { return eigenvalues_.front(); }
  double lambda_max() const { return eigenvalues_.back(); }
  double kappa() const { return eigenvalues_.back() / eigenvalues_.front(); }

 private:
  std::vector<double> eigenvalues_;
};

/// A = H^T H with H (m x n), entries i.i.d. N(0, 1/n), filled row-major.
/// Bit-reproducible for a fixed seed.
inline QuadraticProblem generate_gaussian_problem(std::size_t n, std::size_t m,
                                                  std::uint64_t seed) {
  if (n < 1 || m < 1) throw InvalidParams("n and m must be >= 1");
  Rng rng(seed);
  Matrix h(m, n);
  const double sd = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) h(i, j) = rng.gaussian(0.0, sd);
  return QuadraticProblem::from_gram_factor(std::move(h));
}

struct JacobiOptions {
  int max_sweeps = 100;
  double tol = 1e-12;  // relative to ||A||_F, on the off-diagonal Frobenius norm
  bool want_vectors = false;
};

struct JacobiResult {
  Spectrum spectrum;
  std::optional<Matrix> vectors;  // columns are eigenvectors, aligned ascending
};

/// Cyclic Jacobi eigensolver for symmetric matrices.
inline JacobiResult jacobi_eigenvalues(const QuadraticProblem& problem,
                                       JacobiOptions opts = {}) {
  Matrix a = problem.matrix_a();
  const std::size_t n = a.rows;
  Matrix v = opts.want_vectors ? Matrix::identity(n) : Matrix();

  double fro = 0.0;
  for (double x : a.data) fro += x * x;
  fro = std::sqrt(fro);
  const double off_target = opts.tol * std::max(fro, 1e-300);

  bool converged = false;
  for (int sweep = 0; sweep < opts.max_sweeps && !converged; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) <= off_target) {
      converged = true;
      break;
    }
    for (std::size_t p = 0; p < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);

        const double app = a(p, p);
        const double aqq = a(q, q);
        a(p, p) = app - t * apq;
        a(q, q) = aqq + t * apq;
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          if (r == p || r == q) continue;
          const double arp = a(r, p);
          const double arq = a(r, q);
          a(r, p) = arp - s * (arq + tau * arp);
          a(p, r) = a(r, p);
          a(r, q) = arq + s * (arp - tau * arq);
          a(q, r) = a(r, q);
        }
        if (opts.want_vectors) {
          for (std::size_t r = 0; r < n; ++r) {
            const double vrp = v(r, p);
            const double vrq = v(r, q);
            v(r, p) = vrp - s * (vrq + tau * vrp);
            v(r, q) = vrq + s * (vrp - tau * vrq);
          }
        }
      }
    }
  }
  if (!converged) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * a(p, q) * a(p, q);
    if (std::sqrt(off) > off_target)
      throw NonConvergence("jacobi: off-diagonal norm " +
                           std::to_string(std::sqrt(off)) + " after " +
                           std::to_string(opts.max_sweeps) + " sweeps");
  }

  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

  std::vector<double> eigs(n);
  for (std::size_t i = 0; i < n; ++i) eigs[i] = a(order[i], order[i]);

  std::optional<Matrix> vecs;
  if (opts.want_vectors) {
    Matrix sorted(n, n);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) sorted(i, j) = v(i, order[j]);
    vecs = std::move(sorted);
  }
  return JacobiResult{Spectrum(std::move(eigs)), std::move(vecs)};
}

struct PowerOptions {
  double tol = 1e-10;   // relative Rayleigh-quotient change
  long max_iter = 100000;
  std::uint64_t seed = 1;
};

/// Power iteration estimate of lambda_max(A).
inline double power_method_max(const QuadraticProblem& problem, PowerOptions opts = {}) {
  const std::size_t n = problem.dim();
  Rng rng(opts.seed);
  Vector v(n);
  for (auto& x : v) x = rng.gaussian();
  double nv = norm2(v);
  for (auto& x : v) x /= nv;

  double q_prev = 0.0;
  for (long it = 0; it < opts.max_iter; ++it) {
    Vector w = problem.apply(v);
    const double q = dot(v, w);
    const double nw = norm2(w);
    if (nw == 0.0) throw DegenerateShift("power_method: A v vanished");
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(q - q_prev) <= opts.tol * std::max(std::abs(q), 1e-300))
      return q;
    q_prev = q;
  }
  throw NonConvergence("power_method_max: no convergence after " +
                       std::to_string(opts.max_iter) + " iterations");
}

/// Power iteration on the shifted matrix s*I - A, s = lambda_max_estimate*(1+1e-6);
/// returns s minus the dominant eigenvalue of the shift, i.e. lambda_min(A).
inline double power_method_min(const QuadraticProblem& problem,
                               double lambda_max_estimate, PowerOptions opts = {}) {
  const std::size_t n = problem.dim();
  const double shift = lambda_max_estimate * (1.0 + 1e-6);
  Rng rng(opts.seed);
  Vector v(n);
  for (auto& x : v) x = rng.gaussian();
  double nv = norm2(v);
  for (auto& x : v) x /= nv;

  {
    Vector w = problem.apply(v);
    double norm_b = 0.0;
    for (std::size_t i = 0; i < n; ++i) norm_b += (shift * v[i] - w[i]) * (shift * v[i] - w[i]);
    if (std::sqrt(norm_b) <= 1e-300 * std::max(shift, 1.0))
      throw DegenerateShift("power_method_min: shifted matrix is numerically zero");
  }

  double q_prev = 0.0;
  for (long it = 0; it < opts.max_iter; ++it) {
    Vector aw = problem.apply(v);
    Vector w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = shift * v[i] - aw[i];
    const double q = dot(v, w);
    const double nw = norm2(w);
    if (nw == 0.0) throw DegenerateShift("power_method_min: shifted matrix annihilated v");
    for (std::size_t i = 0; i < n; ++i) v[i] = w[i] / nw;
    if (it > 0 && std::abs(q - q_prev) <= opts.tol * std::max(std::abs(q), 1e-300))
      return shift - q;
    q_prev = q;
  }
  throw NonConvergence("power_method_min: no convergence after " +
                       std::to_string(opts.max_iter) + " iterations");
}

/// Cholesky solve of A x = b for symmetric positive definite A.
inline Vector cholesky_solve(const Matrix& a, const Vector& b) {
  if (a.rows != a.cols || a.rows != b.size())
    throw DimensionMismatch("cholesky_solve: incompatible shapes");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0 || !std::isfinite(d))
      throw SingularSystem("cholesky: matrix not positive definite at pivot " +
                           std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  Vector y(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = b[i];
    for (std::size_t k = 0; k < i; ++k) s -= l(i, k) * y[k];
    y[i] = s / l(i, i);
  }
  Vector x(n);
  for (std::size_t ii = n; ii-- > 0;) {
    double s = y[ii];
    for (std::size_t k = ii + 1; k < n; ++k) s -= l(k, ii) * x[k];
    x[ii] = s / l(ii, ii);
  }
  return x;
}

/// log(det A) through the Cholesky factor; test oracle for eigenvalue products.
inline double log_det(const Matrix& a) {
  if (a.rows != a.cols) throw DimensionMismatch("log_det: matrix must be square");
  const std::size_t n = a.rows;
  Matrix l(n, n);
  double acc = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = a(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d <= 0.0) throw SingularSystem("log_det: not positive definite");
    l(j, j) = std::sqrt(d);
    acc += std::log(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return acc;
}

// -- matrix file format --------------------------------------------------------
//
// Plain text. First line: `n m`. When m > 0 the following m lines hold the
// rows of H (n entries each) and A = H^T H; when m = 0 the following n lines
// hold the rows of A directly. Entries are written with 17 significant digits
// so round-trips are byte-exact.

inline std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

inline void write_matrix_file(const std::string& path, const QuadraticProblem& problem) {
  std::ofstream out(path);
  if (!out) throw IOError("cannot open " + path + " for writing");
  const Matrix& m = problem.factor_h() ? *problem.factor_h() : problem.matrix_a();
  const std::size_t rows_declared = problem.factor_h() ? m.rows : 0;
  out << problem.dim() << ' ' << rows_declared << '\n';
  for (std::size_t i = 0; i < m.rows; ++i) {
    for (std::size_t j = 0; j < m.cols; ++j) {
      if (j) out << ' ';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IOError("write failed for " + path);
}

inline QuadraticProblem read_matrix_file(const std::string& path, double ridge_eta = 0.0) {
  std::ifstream in(path);
  if (!in) throw IOError("cannot open " + path);
  std::size_t n = 0, m = 0;
  if (!(in >> n >> m)) throw ParseError(path + ": malformed header line");
  if (n == 0) throw ParseError(path + ": dimension must be positive");
  const std::size_t rows = (m == 0) ? n : m;
  Matrix mat(rows, n);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (!(in >> mat(i, j)))
        throw ParseError(path + ": missing entry at row " + std::to_string(i + 1) +
                         ", column " + std::to_string(j + 1));
  if (m == 0) {
    for (std::size_t i = 0; i < n; ++i) mat(i, i) += ridge_eta;
    return QuadraticProblem::from_matrix(std::move(mat), ridge_eta);
  }
  return QuadraticProblem::from_gram_factor(std::move(mat), ridge_eta);
}

}  // namespace linalg
}  // namespace chebgd
