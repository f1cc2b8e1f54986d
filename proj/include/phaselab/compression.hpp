#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"

namespace phaselab {

inline constexpr double kRankTol = 1e-12;

namespace detail {

inline Index query_block(const ComplexMatrix& v, Index l, Index s) {
  require(l >= 1 && s >= 1, ErrorKind::kDimension, "query and workspace dimensions must be >= 1");
  require(v.rows() == l * s, ErrorKind::kDimension,
          "isometry output dimension " + std::to_string(v.rows()) + " is not L*S = " + std::to_string(l) + "*" +
              std::to_string(s));
  return s;
}

}  // namespace detail

// M_z = V^dag (|z><z| (x) I_S) V, with output index z*S + s.
inline std::vector<ComplexMatrix> measurement_operators(const ComplexMatrix& v, Index l, Index s) {
  detail::query_block(v, l, s);
  std::vector<ComplexMatrix> out;
  out.reserve(static_cast<std::size_t>(l));
  for (Index z = 0; z < l; ++z) {
    const auto block = v.middleRows(z * s, s);
    ComplexMatrix m = block.adjoint() * block;
    out.push_back((m + m.adjoint()) / 2.0);
  }
  return out;
}

// Square root of a PSD matrix. Eigenvalues in [-1e-12, 0) are clipped.
inline ComplexMatrix psd_sqrt(const ComplexMatrix& m) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es((m + m.adjoint()) / 2.0);
  const RealVector ev = es.eigenvalues();
  detail::require(ev.minCoeff() >= -1e-12, ErrorKind::kNumerical,
                  "matrix is not positive semidefinite (eigenvalue " + std::to_string(ev.minCoeff()) + ")");
  const RealVector root = ev.cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * root.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

// sum_z |z> (x) sqrt(M_z): maps C^D into C^L (x) C^D, index z*D + d.
inline ComplexMatrix compress_isometry(const ComplexMatrix& v, Index l, Index s) {
  const auto ops = measurement_operators(v, l, s);
  const Index d = v.cols();
  ComplexMatrix out(l * d, d);
  for (Index z = 0; z < l; ++z) out.middleRows(z * d, d) = psd_sqrt(ops[static_cast<std::size_t>(z)]);
  return out;
}

// Given columns X (d1 x m) and Y (d2 x m) with matching Gram matrices, returns
// an isometry T with T X = Y. On span(X) it is (Y^dag)^+ X^dag; the orthogonal
// complement of span(X) goes to part of the complement of span(Y).
inline ComplexMatrix extend_to_isometry(const ComplexMatrix& xs, const ComplexMatrix& ys) {
  detail::require(xs.cols() == ys.cols() && xs.cols() >= 1, ErrorKind::kDimension,
                  "extend_to_isometry needs the same nonzero number of vectors on both sides");
  const Index d1 = xs.rows(), d2 = ys.rows();
  detail::require(d1 <= d2, ErrorKind::kDimension,
                  "cannot embed dimension " + std::to_string(d1) + " isometrically into " + std::to_string(d2));
  const ComplexMatrix gap = xs.adjoint() * xs - ys.adjoint() * ys;
  Index wi = 0, wj = 0;
  const double worst = gap.cwiseAbs().maxCoeff(&wi, &wj);
  detail::require(worst <= kDerivedTol, ErrorKind::kInvalidInput,
                  "inner products differ by " + detail::sci(worst) + " at pair (" + std::to_string(wi) + ", " +
                      std::to_string(wj) + ")");

  Eigen::JacobiSVD<ComplexMatrix> ysvd(ys.adjoint(), Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& sy = ysvd.singularValues();
  const double ytol = kRankTol * std::max(1.0, sy.size() ? sy(0) : 0.0);
  RealVector inv = RealVector::Zero(sy.size());
  for (Index i = 0; i < sy.size(); ++i)
    if (sy(i) > ytol) inv(i) = 1.0 / sy(i);
  // (Y^dag)^+ = V_y diag(1/s) U_y^dag for Y^dag = U_y diag(s) V_y^dag.
  const ComplexMatrix y_pinv = ysvd.matrixV() * inv.cast<Complex>().asDiagonal() * ysvd.matrixU().adjoint();
  ComplexMatrix t = y_pinv * xs.adjoint();

  Eigen::JacobiSVD<ComplexMatrix> xfull(xs, Eigen::ComputeFullU);
  Eigen::JacobiSVD<ComplexMatrix> yfull(ys, Eigen::ComputeFullU);
  auto rank_of = [](const RealVector& s) {
    const double tol = kRankTol * std::max(1.0, s.size() ? s(0) : 0.0);
    Index r = 0;
    while (r < s.size() && s(r) > tol) ++r;
    return r;
  };
  const Index rx = rank_of(xfull.singularValues());
  const Index ry = rank_of(yfull.singularValues());
  detail::require(rx == ry, ErrorKind::kNumerical,
                  "span ranks differ (" + std::to_string(rx) + " vs " + std::to_string(ry) + ")");
  const Index free = d1 - rx;
  if (free > 0) t += yfull.matrixU().middleCols(ry, free) * xfull.matrixU().middleCols(rx, free).adjoint();
  return t;
}

namespace detail {

// (O_f (x) I_block) applied to a vector whose index is z*block + j.
inline ComplexVector apply_query_oracle(ComplexVector v, const BooleanFunction& f, Index block) {
  for (Index z = 0; z < static_cast<Index>(f.size()); ++z)
    if (f[static_cast<std::size_t>(z)] < 0) v.segment(z * block, block) *= -1.0;
  return v;
}

}  // namespace detail

// Max over random (f, g, x, y) of |<Phi_{f,x}|Phi_{g,y}> - <Phi'_{f,x}|Phi'_{g,y}>|
// where Phi_{f,x} = (O_f (x) I_S) V x and Phi' uses compress(V) instead.
inline double verify_one_query_simulation(const AdversarySpec& adv, Index l, std::size_t trials, const RngStream& rng) {
  detail::require(trials >= 1, ErrorKind::kInvalidInput, "verification needs trials >= 1");
  detail::require(l >= 1 && adv.M() % l == 0, ErrorKind::kDimension,
                  "adversary dimension M = " + std::to_string(adv.M()) + " does not factor as L*S with L = " +
                      std::to_string(l));
  const Index s = adv.M() / l;
  const Index d = adv.N();
  const ComplexMatrix compressed = compress_isometry(adv.V(), l, s);
  std::vector<double> dev(trials);
  parallel_for(trials, [&](std::size_t t) {
    RngStream stream = rng.derive(t);
    const auto f = BooleanFunction::random(static_cast<std::size_t>(l), stream);
    const auto g = BooleanFunction::random(static_cast<std::size_t>(l), stream);
    const ComplexVector x = random_unit_vector(d, stream).amplitudes();
    const ComplexVector y = random_unit_vector(d, stream).amplitudes();
    const Complex full = detail::apply_query_oracle(adv.V() * x, f, s).dot(detail::apply_query_oracle(adv.V() * y, g, s));
    const Complex small =
        detail::apply_query_oracle(compressed * x, f, d).dot(detail::apply_query_oracle(compressed * y, g, d));
    dev[t] = std::abs(full - small);
  });
  double worst = 0.0;
  for (const double v : dev) worst = std::max(worst, v);
  return worst;
}

// Isometry T : C^L (x) C^D -> C^L (x) C^S with T (O_f (x) I) compress(V) = (O_f (x) I) V
// for every f. Built from f = all-ones and its single-coordinate flips, which
// span every f linearly. Needs D <= S.
inline ComplexMatrix compression_equivalence_isometry(const ComplexMatrix& v, Index l, Index s) {
  detail::query_block(v, l, s);
  const Index d = v.cols();
  detail::require(d <= s, ErrorKind::kDimension, "equivalence isometry needs D <= S");
  const ComplexMatrix compressed = compress_isometry(v, l, s);
  ComplexMatrix xs(l * d, (l + 1) * d), ys(l * s, (l + 1) * d);
  for (Index j = 0; j <= l; ++j) {
    std::vector<std::int8_t> f(static_cast<std::size_t>(l), 1);
    if (j > 0) f[static_cast<std::size_t>(j - 1)] = -1;
    const BooleanFunction fn(std::move(f));
    for (Index c = 0; c < d; ++c) {
      xs.col(j * d + c) = detail::apply_query_oracle(compressed.col(c), fn, d);
      ys.col(j * d + c) = detail::apply_query_oracle(v.col(c), fn, s);
    }
  }
  return extend_to_isometry(xs, ys);
}

}  // namespace phaselab
