#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/rng.hpp"

namespace phaselab {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kStructuralTol = 1e-10;
inline constexpr double kDerivedTol = 1e-8;

// A normalized amplitude vector. Construction checks the norm.
class UnitVector {
 public:
  explicit UnitVector(ComplexVector amplitudes, double tol = kStructuralTol)
      : amplitudes_(std::move(amplitudes)) {
    detail::require(amplitudes_.size() >= 1, ErrorKind::kInvalidInput, "unit vector must be nonempty");
    detail::require(amplitudes_.allFinite(), ErrorKind::kInvalidInput, "unit vector has non-finite entries");
    const double norm2 = amplitudes_.squaredNorm();
    detail::require(std::abs(norm2 - 1.0) <= tol, ErrorKind::kInvalidInput,
                    "vector is not normalized (squared norm " + std::to_string(norm2) + ")");
  }

  static UnitVector normalized(const ComplexVector& v) {
    const double n = v.norm();
    detail::require(n > 0.0 && std::isfinite(n), ErrorKind::kInvalidInput, "cannot normalize a zero vector");
    return UnitVector(v / n);
  }

  static UnitVector basis(Index dim, Index i) {
    ComplexVector v = ComplexVector::Zero(dim);
    v(i) = 1.0;
    return UnitVector(std::move(v));
  }

  Index dim() const { return amplitudes_.size(); }
  const ComplexVector& amplitudes() const { return amplitudes_; }
  Complex operator[](Index i) const { return amplitudes_(i); }

 private:
  ComplexVector amplitudes_;
};

inline double max_abs(const ComplexMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

// max |(V^dag V - I)_ij|
inline double isometry_residual(const ComplexMatrix& v) {
  return max_abs(v.adjoint() * v - ComplexMatrix::Identity(v.cols(), v.cols()));
}

// max of the idempotence and self-adjointness residuals.
inline double projector_residual(const ComplexMatrix& p) {
  if (p.rows() != p.cols()) return INFINITY;
  return std::max(max_abs(p * p - p), max_abs(p - p.adjoint()));
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = 1e-12) {
  if (m.rows() != m.cols()) return false;
  return max_abs(m - m.adjoint()) <= tol * std::max(1.0, max_abs(m));
}

inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

enum class NormMethod { kAuto, kDense, kPowerIteration };

struct NormOptions {
  NormMethod method = NormMethod::kAuto;
  Index dense_limit = 512;
  double rel_tol = 1e-10;
  int max_iterations = 20000;
};

namespace detail {

inline void check_norm_input(const ComplexMatrix& m) {
  require(m.rows() >= 1 && m.cols() >= 1, ErrorKind::kInvalidInput, "operator norm of an empty matrix");
  require(m.allFinite(), ErrorKind::kInvalidInput, "operator norm input has non-finite entries");
}

// Top eigenvalue of A^dag A by power iteration with a Rayleigh-quotient stop.
inline double power_sigma2(const ComplexMatrix& a, ComplexVector v, const NormOptions& opts, bool& converged) {
  converged = false;
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    const ComplexVector av = a * v;
    const double next = av.squaredNorm();
    ComplexVector w = a.adjoint() * av;
    const double wn = w.norm();
    if (wn == 0.0) return next;
    v = w / wn;
    if (it > 0 && std::abs(next - estimate) <= opts.rel_tol * next) {
      converged = true;
      return std::max(next, estimate);
    }
    estimate = next;
  }
  return estimate;
}

}  // namespace detail

// Largest singular value by power iteration on A^dag A. Exposed separately so
// the iterative path can be tested against the dense one.
inline double operator_norm_power(const ComplexMatrix& m, const NormOptions& opts = {}) {
  detail::check_norm_input(m);
  if (max_abs(m) == 0.0) return 0.0;
  ComplexVector start(m.cols());
  for (Index i = 0; i < m.cols(); ++i) start(i) = Complex(1.0 + 0.37 * std::sin(1.0 + i), 0.21 * std::cos(3.0 * i));
  bool converged = false;
  double sigma2 = detail::power_sigma2(m, start, opts, converged);
  if (!converged || sigma2 == 0.0) {
    RngStream rng(0x6f70'6e6f'726dULL, static_cast<std::uint64_t>(m.rows() * 131 + m.cols()));
    ComplexVector restart(m.cols());
    for (Index i = 0; i < m.cols(); ++i) restart(i) = rng.complex_normal();
    bool again = false;
    sigma2 = std::max(sigma2, detail::power_sigma2(m, restart, opts, again));
  }
  return std::sqrt(std::max(sigma2, 0.0));
}

inline double operator_norm(const ComplexMatrix& m, const NormOptions& opts = {}) {
  detail::check_norm_input(m);
  if (opts.method == NormMethod::kPowerIteration) return operator_norm_power(m, opts);
  const bool dense = opts.method == NormMethod::kDense;
  if (m.rows() == m.cols() && (dense || m.rows() <= opts.dense_limit) && is_hermitian(m)) {
    const ComplexMatrix h = (m + m.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  }
  const Index small = std::min(m.rows(), m.cols());
  if (dense || small <= opts.dense_limit) {
    const ComplexMatrix gram = m.cols() <= m.rows() ? ComplexMatrix(m.adjoint() * m) : ComplexMatrix(m * m.adjoint());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(gram, Eigen::EigenvaluesOnly);
    return std::sqrt(std::max(es.eigenvalues()(small - 1), 0.0));
  }
  return operator_norm_power(m, opts);
}

// Haar-distributed unit vector in C^dim.
inline UnitVector random_unit_vector(Index dim, RngStream& rng) {
  detail::require(dim >= 1, ErrorKind::kDimension, "random unit vector needs dim >= 1");
  ComplexVector v(dim);
  for (Index i = 0; i < dim; ++i) v(i) = rng.complex_normal();
  return UnitVector::normalized(v);
}

// Haar-distributed isometry: QR of a complex Gaussian matrix with the phases
// of R's diagonal absorbed into Q.
inline ComplexMatrix random_isometry(Index n_in, Index n_out, RngStream& rng) {
  detail::require(n_in >= 1, ErrorKind::kDimension, "isometry needs input dimension >= 1");
  detail::require(n_out >= n_in, ErrorKind::kDimension,
                  "isometry needs n_out >= n_in (got " + std::to_string(n_in) + " -> " + std::to_string(n_out) + ")");
  ComplexMatrix g(n_out, n_in);
  for (Index i = 0; i < n_out; ++i)
    for (Index j = 0; j < n_in; ++j) g(i, j) = rng.complex_normal();
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n_out, n_in);
  for (Index j = 0; j < n_in; ++j) {
    const Complex d = qr.matrixQR()(j, j);
    if (std::abs(d) > 0.0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

// Orthogonal projector onto a Haar-random rank-`rank` subspace.
inline ComplexMatrix random_projector(Index dim, Index rank, RngStream& rng) {
  detail::require(dim >= 0 && rank >= 0, ErrorKind::kDimension, "negative projector dimensions");
  detail::require(rank <= dim, ErrorKind::kDimension,
                  "projector rank " + std::to_string(rank) + " exceeds dimension " + std::to_string(dim));
  if (rank == 0) return ComplexMatrix::Zero(dim, dim);
  if (rank == dim) return ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix w = random_isometry(rank, dim, rng);
  ComplexMatrix p = w * w.adjoint();
  return (p + p.adjoint()) / 2.0;
}

inline double tv_distance(std::span<const double> p, std::span<const double> q) {
  detail::require(p.size() == q.size(), ErrorKind::kInvalidInput,
                  "tv_distance length mismatch (" + std::to_string(p.size()) + " vs " + std::to_string(q.size()) + ")");
  auto check = [](std::span<const double> x, const char* name) {
    double total = 0.0;
    for (const double v : x) {
      detail::require(std::isfinite(v) && v >= 0.0, ErrorKind::kInvalidInput,
                      std::string(name) + " has a negative or non-finite entry");
      total += v;
    }
    detail::require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kInvalidInput,
                    std::string(name) + " sums to " + detail::sci(total) + ", not 1");
  };
  check(p, "p");
  check(q, "q");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) sum += std::abs(p[i] - q[i]);
  return std::clamp(0.5 * sum, 0.0, 1.0);
}

}  // namespace phaselab
