#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/numerics.hpp"

namespace phaselab {

// Weights at or below this are treated as zero rows of V.
inline constexpr double kZeroWeight = 1e-14;

// Per-row weights ||row_i(V)||^2 / N; a probability vector over [0, M).
class IsometryWeights {
 public:
  explicit IsometryWeights(RealVector weights) : weights_(std::move(weights)) {
    detail::require(weights_.size() >= 1, ErrorKind::kInvalidInput, "weights must be nonempty");
    detail::require(weights_.allFinite() && weights_.minCoeff() >= 0.0, ErrorKind::kInvalidInput,
                    "weights must be finite and nonnegative");
    const double total = weights_.sum();
    detail::require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kInvalidInput,
                    "weights sum to " + detail::sci(total) + ", not 1");
  }

  Index M() const { return weights_.size(); }
  const RealVector& values() const { return weights_; }
  double operator[](Index i) const { return weights_(i); }
  bool masked(Index i) const { return weights_(i) <= kZeroWeight; }

 private:
  RealVector weights_;
};

inline IsometryWeights isometry_weights(const ComplexMatrix& v) {
  detail::require(v.rows() >= v.cols() && v.cols() >= 1, ErrorKind::kInvalidInput, "V must be M x N with M >= N >= 1");
  const double res = isometry_residual(v);
  detail::require(res <= 1e-8, ErrorKind::kInvalidInput,
                  "V is not an isometry: max |V^dag V - I| = " + detail::sci(res));
  return IsometryWeights(v.rowwise().squaredNorm() / static_cast<double>(v.cols()));
}

inline UnitVector weight_vector(const IsometryWeights& w) {
  return UnitVector(w.values().cwiseSqrt().cast<Complex>(), 1e-9);
}

// Diagonal D with V psi_h = D |wt_V>. Masked (zero-weight) entries are 0.
class RescalingMatrix {
 public:
  RescalingMatrix(ComplexVector diagonal, std::vector<bool> mask) : diagonal_(std::move(diagonal)), mask_(std::move(mask)) {
    detail::require(static_cast<Index>(mask_.size()) == diagonal_.size(), ErrorKind::kDimension,
                    "rescaling mask length differs from diagonal");
    for (Index i = 0; i < diagonal_.size(); ++i)
      if (mask_[static_cast<std::size_t>(i)]) diagonal_(i) = 0.0;
  }

  Index M() const { return diagonal_.size(); }
  const ComplexVector& diagonal() const { return diagonal_; }
  const std::vector<bool>& mask() const { return mask_; }
  bool masked(Index i) const { return mask_[static_cast<std::size_t>(i)]; }
  Complex operator[](Index i) const { return diagonal_(i); }

  ComplexMatrix dense() const { return diagonal_.asDiagonal(); }
  ComplexVector apply(const ComplexVector& x) const { return diagonal_.cwiseProduct(x); }

 private:
  ComplexVector diagonal_;
  std::vector<bool> mask_;
};

class TruncationConfig {
 public:
  explicit TruncationConfig(double bound) : bound_(bound) {
    detail::require(std::isfinite(bound) && bound > 0.0, ErrorKind::kInvalidInput, "truncation bound B must be > 0");
  }
  double B() const { return bound_; }

 private:
  double bound_;
};

inline Complex truncate_entry(Complex t, double bound) {
  const double mag = std::abs(t);
  return mag <= bound ? t : t * (bound / mag);
}

namespace detail {

inline std::vector<bool> weight_mask(const IsometryWeights& w) {
  std::vector<bool> mask(static_cast<std::size_t>(w.M()));
  for (Index i = 0; i < w.M(); ++i) mask[static_cast<std::size_t>(i)] = w.masked(i);
  return mask;
}

// Divides row i of `amplitudes` by sqrt(wt_i); masked rows become 0.
inline ComplexMatrix rescale_rows(ComplexMatrix amplitudes, const IsometryWeights& w) {
  for (Index i = 0; i < w.M(); ++i) {
    if (w.masked(i))
      amplitudes.row(i).setZero();
    else
      amplitudes.row(i) /= std::sqrt(w[i]);
  }
  return amplitudes;
}

}  // namespace detail

inline RescalingMatrix rescaling_matrix(const ComplexMatrix& v, const IsometryWeights& w, const BooleanFunction& h) {
  detail::require(static_cast<Index>(h.size()) == v.cols(), ErrorKind::kDimension,
                  "function length " + std::to_string(h.size()) + " differs from V input dimension " +
                      std::to_string(v.cols()));
  detail::require(w.M() == v.rows(), ErrorKind::kDimension, "weights do not match V");
  const ComplexMatrix col = detail::rescale_rows(v * phase_state(h).amplitudes(), w);
  return RescalingMatrix(col.col(0), detail::weight_mask(w));
}

inline RescalingMatrix rescaling_matrix(const ComplexMatrix& v, const BooleanFunction& h) {
  return rescaling_matrix(v, isometry_weights(v), h);
}

// M x K matrix whose column k is the diagonal of D_{V, R_k}.
inline ComplexMatrix rescaling_columns(const ComplexMatrix& v, const IsometryWeights& w, const FunctionFamily& r) {
  detail::require(static_cast<Index>(r.N()) == v.cols(), ErrorKind::kDimension,
                  "family has N = " + std::to_string(r.N()) + ", V has input dimension " + std::to_string(v.cols()));
  return detail::rescale_rows(v * r.phase_states().cast<Complex>(), w);
}

inline RescalingMatrix truncate_rescaling(const RescalingMatrix& d, const TruncationConfig& cfg) {
  ComplexVector out = d.diagonal();
  for (Index i = 0; i < out.size(); ++i) out(i) = truncate_entry(out(i), cfg.B());
  return RescalingMatrix(std::move(out), d.mask());
}

inline ComplexMatrix truncate_columns(ComplexMatrix columns, const TruncationConfig& cfg) {
  for (Index j = 0; j < columns.cols(); ++j)
    for (Index i = 0; i < columns.rows(); ++i) columns(i, j) = truncate_entry(columns(i, j), cfg.B());
  return columns;
}

// max over unmasked i of (1/K) sum_k |D_{R_k, i}|^2.
inline double width(const ComplexMatrix& v, const FunctionFamily& r) {
  const IsometryWeights w = isometry_weights(v);
  const ComplexMatrix d = rescaling_columns(v, w, r);
  double best = 0.0;
  for (Index i = 0; i < d.rows(); ++i)
    if (!w.masked(i)) best = std::max(best, d.row(i).squaredNorm() / static_cast<double>(r.K()));
  return best;
}

// |D| <= B everywhere, with a 1e-12 relative allowance so that the
// Cauchy-Schwarz extreme |D| = sqrt(N) counts as bounded at B = sqrt(N).
inline bool is_b_bounded(const ComplexMatrix& v, const FunctionFamily& r, const TruncationConfig& cfg) {
  const IsometryWeights w = isometry_weights(v);
  const ComplexMatrix d = rescaling_columns(v, w, r);
  return d.size() == 0 || d.cwiseAbs().maxCoeff() <= cfg.B() * (1.0 + 1e-12);
}

}  // namespace phaselab
