#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/attacks.hpp"
#include "phaselab/decomposition.hpp"
#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"

namespace phaselab {

// Empirical mean compared with a reference value, with 3 standard errors of slack.
struct MeanCheck {
  std::string label;
  double empirical = 0.0;
  double standard_error = 0.0;
  double reference = 0.0;
  bool two_sided = false;  // |empirical - reference| instead of empirical <= reference

  bool passes() const {
    const double slack = 3.0 * standard_error + 1e-12;
    return two_sided ? std::abs(empirical - reference) <= slack : empirical <= reference + slack;
  }
};

struct TailReport {
  std::string bound_name;
  std::size_t samples = 0;
  std::vector<double> thresholds;
  std::vector<double> frequencies;
  std::vector<double> bound_values;
  std::vector<MeanCheck> mean_checks;
  std::vector<std::pair<std::string, double>> extras;

  // 3 sigma binomial slack, sigma computed at the bound (clamped to [0, 1]).
  double slack(std::size_t i) const {
    const double p = std::clamp(bound_values[i], 0.0, 1.0);
    return 3.0 * std::sqrt(p * (1.0 - p) / static_cast<double>(samples));
  }

  bool threshold_passes(std::size_t i) const { return frequencies[i] <= bound_values[i] + slack(i); }

  bool passes() const {
    for (std::size_t i = 0; i < thresholds.size(); ++i)
      if (!threshold_passes(i)) return false;
    for (const auto& m : mean_checks)
      if (!m.passes()) return false;
    return true;
  }

  double extra(const std::string& name) const {
    for (const auto& [k, v] : extras)
      if (k == name) return v;
    throw Error(ErrorKind::kInvalidInput, "report has no field '" + name + "'");
  }
};

namespace detail {

struct SampleStats {
  double mean = 0.0;
  double standard_error = 0.0;
};

inline SampleStats sample_stats(const std::vector<double>& values) {
  SampleStats s;
  const double n = static_cast<double>(values.size());
  for (const double v : values) s.mean += v;
  s.mean /= n;
  double ss = 0.0;
  for (const double v : values) ss += (v - s.mean) * (v - s.mean);
  s.standard_error = values.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
  return s;
}

// Fraction of `values` at or above each threshold.
inline std::vector<double> exceedance(const std::vector<double>& values, const std::vector<double>& thresholds) {
  std::vector<double> out;
  for (const double t : thresholds) {
    std::size_t hits = 0;
    for (const double v : values) hits += v >= t;
    out.push_back(static_cast<double>(hits) / static_cast<double>(values.size()));
  }
  return out;
}

// values[i] = sample(i, stream i).
template <class Sample>
std::vector<double> draw_samples(std::size_t samples, const RngStream& rng, Sample&& sample) {
  std::vector<double> values(samples);
  parallel_for(samples, [&](std::size_t i) {
    RngStream s = rng.derive(i);
    values[i] = sample(s);
  });
  return values;
}

inline double max_eigenvalue(const ComplexMatrix& h) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(h.rows() - 1);
}

inline void require_samples(std::size_t samples, std::size_t minimum) {
  require(samples >= minimum, ErrorKind::kInvalidInput,
          "bench needs at least " + std::to_string(minimum) + " samples (got " + std::to_string(samples) + ")");
}

}  // namespace detail

// Z = sum_k x_k C_k with uniform signs x_k. Checks E||Z|| <= sqrt(2 ln(d1+d2)) sqrt(v)
// and P(||Z|| >= t) <= (d1+d2) exp(-t^2 / 2v), v = max(||sum C C^dag||, ||sum C^dag C||).
inline TailReport rademacher_series_bench(const std::vector<ComplexMatrix>& coefficients, std::size_t samples,
                                          const RngStream& rng, std::vector<double> thresholds = {}) {
  detail::require_samples(samples, 100);
  detail::require(!coefficients.empty(), ErrorKind::kInvalidInput, "need at least one coefficient matrix");
  const Index d1 = coefficients.front().rows(), d2 = coefficients.front().cols();
  ComplexMatrix left = ComplexMatrix::Zero(d1, d1), right = ComplexMatrix::Zero(d2, d2);
  for (const auto& c : coefficients) {
    detail::require(c.rows() == d1 && c.cols() == d2, ErrorKind::kDimension, "coefficient matrices differ in shape");
    left += c * c.adjoint();
    right += c.adjoint() * c;
  }
  const double v = std::max(operator_norm(left), operator_norm(right));
  const double dims = static_cast<double>(d1 + d2);
  if (thresholds.empty()) thresholds = {2.0 * std::sqrt(v), 3.0 * std::sqrt(v), 4.0 * std::sqrt(v)};

  const auto norms = detail::draw_samples(samples, rng, [&](RngStream& s) {
    ComplexMatrix z = ComplexMatrix::Zero(d1, d2);
    for (const auto& c : coefficients) z += static_cast<double>(s.sign()) * c;
    return operator_norm(z);
  });
  TailReport rep;
  rep.bound_name = "matrix-rademacher";
  rep.samples = samples;
  rep.thresholds = thresholds;
  rep.frequencies = detail::exceedance(norms, thresholds);
  for (const double t : thresholds) rep.bound_values.push_back(v > 0 ? dims * std::exp(-t * t / (2 * v)) : 0.0);
  const auto stats = detail::sample_stats(norms);
  rep.mean_checks.push_back({"mean-norm", stats.mean, stats.standard_error, std::sqrt(2 * std::log(dims)) * std::sqrt(v)});
  rep.extras = {{"variance_parameter", v}, {"mean_norm", stats.mean}};
  return rep;
}

// I.i.d. Hermitian summands with a certified bound Z^2 <= C^2.
struct HoeffdingSampler {
  std::string name;
  Index dim = 1;
  ComplexMatrix square_bound;  // C^2
  std::function<ComplexMatrix(RngStream&)> draw;
};

inline HoeffdingSampler scalar_sign_sampler(double c) {
  ComplexMatrix c2(1, 1);
  c2(0, 0) = c * c;
  return {"scalar-sign", 1, c2, [c](RngStream& s) {
            ComplexMatrix z(1, 1);
            z(0, 0) = c * s.sign();
            return z;
          }};
}

inline HoeffdingSampler zero_sampler(Index dim) {
  return {"zero", dim, ComplexMatrix::Zero(dim, dim), [dim](RngStream&) { return ComplexMatrix(ComplexMatrix::Zero(dim, dim)); }};
}

// X_h = D_h^dag Pi D_h - E_h[...] with D_h truncated at B; the mean is estimated
// from `mean_samples` draws. Every term has norm <= B^2, so X_h^2 <= 4 B^4 I.
inline HoeffdingSampler rescaling_sampler(const AdversarySpec& adv, double bound, std::size_t mean_samples,
                                          const RngStream& rng) {
  const TruncationConfig cfg(bound);
  const IsometryWeights w = isometry_weights(adv.V());
  RngStream s = rng.derive(0);
  const ComplexMatrix d = truncate_columns(rescaling_columns(adv.V(), w, FunctionFamily::random(mean_samples, static_cast<std::size_t>(adv.N()), s)), cfg);
  ComplexMatrix mean = adv.Pi().cwiseProduct(d.conjugate() * d.transpose()) / static_cast<double>(mean_samples);
  mean = (mean + mean.adjoint()) / 2.0;
  const Index m = adv.M();
  auto draw = [adv, w, cfg, mean](RngStream& stream) {
    const ComplexMatrix col = truncate_columns(
        rescaling_columns(adv.V(), w, FunctionFamily::random(1, static_cast<std::size_t>(adv.N()), stream)), cfg);
    ComplexMatrix x = adv.Pi().cwiseProduct(col.conjugate() * col.transpose()) - mean;
    return ComplexMatrix((x + x.adjoint()) / 2.0);
  };
  return {"rescaling", m, 4.0 * std::pow(bound, 4) * ComplexMatrix::Identity(m, m), draw};
}

// P(lambda_max(sum_{k<K} Z_k) >= t) <= D exp(-t^2 / 8 sigma^2), sigma^2 = ||sum_k C_k^2||.
// Default thresholds are 0.5, 1 and 2 sigma.
inline TailReport matrix_hoeffding_bench(const HoeffdingSampler& sampler, std::size_t k, std::size_t samples,
                                         const RngStream& rng, std::vector<double> thresholds = {}) {
  detail::require_samples(samples, 1);
  detail::require(k >= 1, ErrorKind::kInvalidInput, "need K >= 1 summands");
  const double sigma2 = static_cast<double>(k) * operator_norm(sampler.square_bound);
  const double sigma = std::sqrt(sigma2);
  if (thresholds.empty()) thresholds = sigma > 0 ? std::vector<double>{0.5 * sigma, sigma, 2 * sigma} : std::vector<double>{0.5, 1.0, 2.0};

  const auto tops = detail::draw_samples(samples, rng, [&](RngStream& s) {
    ComplexMatrix total = ComplexMatrix::Zero(sampler.dim, sampler.dim);
    for (std::size_t j = 0; j < k; ++j) {
      const ComplexMatrix z = sampler.draw(s);
      detail::require(z.rows() == sampler.dim && z.cols() == sampler.dim && is_hermitian(z, 1e-10),
                      ErrorKind::kInvalidInput, "sampler '" + sampler.name + "' produced a non-Hermitian matrix");
      total += z;
    }
    return detail::max_eigenvalue(total);
  });
  TailReport rep;
  rep.bound_name = "matrix-hoeffding/" + sampler.name;
  rep.samples = samples;
  rep.thresholds = thresholds;
  rep.frequencies = detail::exceedance(tops, thresholds);
  for (const double t : thresholds)
    rep.bound_values.push_back(sigma2 > 0 ? static_cast<double>(sampler.dim) * std::exp(-t * t / (8 * sigma2)) : 0.0);
  rep.extras = {{"sigma2", sigma2}, {"K", static_cast<double>(k)}};
  return rep;
}

// S = sum_i a_i b_i with sum |a_i|^2 = 1: P(|S| >= t) <= 2 exp(-t^2 / 2) and E|S|^2 = 1.
inline TailReport complex_hoeffding_bench(const std::vector<Complex>& weights, std::size_t samples,
                                          const RngStream& rng) {
  detail::require_samples(samples, 2);
  double total = 0.0;
  for (const auto a : weights) total += std::norm(a);
  detail::require(std::abs(total - 1.0) <= 1e-9, ErrorKind::kInvalidInput,
                  "weights must have unit squared norm (got " + detail::sci(total) + ")");
  const auto mags = detail::draw_samples(samples, rng, [&](RngStream& s) {
    Complex sum = 0.0;
    for (const auto a : weights) sum += static_cast<double>(s.sign()) * a;
    return std::abs(sum);
  });
  TailReport rep;
  rep.bound_name = "complex-hoeffding";
  rep.samples = samples;
  rep.thresholds = {1.0, 2.0, 3.0};
  rep.frequencies = detail::exceedance(mags, rep.thresholds);
  for (const double t : rep.thresholds) rep.bound_values.push_back(2.0 * std::exp(-t * t / 2.0));
  std::vector<double> squares;
  for (const double m : mags) squares.push_back(m * m);
  const auto stats = detail::sample_stats(squares);
  rep.mean_checks.push_back({"mean-squared-magnitude", stats.mean, stats.standard_error, 1.0, true});
  rep.extras = {{"mean_squared_magnitude", stats.mean}};
  return rep;
}

// Pooled over output coordinates i (cycled by sample index):
// P(|D_{h,i}|^2 - 1 >= t) <= 2 exp(-t / 4).
inline TailReport subexponential_diagonal_bench(const ComplexMatrix& v, std::size_t samples, const RngStream& rng) {
  detail::require_samples(samples, 1);
  const IsometryWeights w = isometry_weights(v);
  std::vector<Index> live;
  for (Index i = 0; i < w.M(); ++i)
    if (!w.masked(i)) live.push_back(i);
  std::vector<double> values(samples);
  parallel_for(samples, [&](std::size_t j) {
    RngStream s = rng.derive(j);
    const Index i = live[j % live.size()];
    const ComplexMatrix col = rescaling_columns(v, w, FunctionFamily::random(1, static_cast<std::size_t>(v.cols()), s));
    values[j] = std::norm(col(i, 0)) - 1.0;
  });
  TailReport rep;
  rep.bound_name = "subexponential-diagonal";
  rep.samples = samples;
  rep.thresholds = {2.0, 4.0, 8.0};
  rep.frequencies = detail::exceedance(values, rep.thresholds);
  for (const double t : rep.thresholds) rep.bound_values.push_back(2.0 * std::exp(-t / 4.0));
  return rep;
}

struct WidthTailOptions {
  double rate_constant = 0.05;
  std::optional<double> mean_width_limit = 3.0;
};

// P(width(R) >= 1 + t) <= 2M exp(-c min(t^2, t) K) over fresh random families.
inline TailReport width_tail_bench(const ComplexMatrix& v, std::size_t k, std::size_t samples,
                                   const std::vector<double>& thresholds, const RngStream& rng,
                                   const WidthTailOptions& opts = {}) {
  detail::require_samples(samples, 1);
  detail::require(k >= 1, ErrorKind::kInvalidInput, "need K >= 1");
  const IsometryWeights w = isometry_weights(v);
  const auto widths = detail::draw_samples(samples, rng, [&](RngStream& s) {
    const ComplexMatrix d = rescaling_columns(v, w, FunctionFamily::random(k, static_cast<std::size_t>(v.cols()), s));
    double best = 0.0;
    for (Index i = 0; i < d.rows(); ++i)
      if (!w.masked(i)) best = std::max(best, d.row(i).squaredNorm() / static_cast<double>(k));
    return best;
  });
  std::vector<double> shifted;
  for (const double t : thresholds) shifted.push_back(1.0 + t);
  TailReport rep;
  rep.bound_name = "width-tail";
  rep.samples = samples;
  rep.thresholds = thresholds;
  rep.frequencies = detail::exceedance(widths, shifted);
  for (const double t : thresholds)
    rep.bound_values.push_back(2.0 * static_cast<double>(v.rows()) *
                               std::exp(-opts.rate_constant * std::min(t * t, t) * static_cast<double>(k)));
  const auto stats = detail::sample_stats(widths);
  if (opts.mean_width_limit) rep.mean_checks.push_back({"mean-width", stats.mean, stats.standard_error, *opts.mean_width_limit});
  rep.extras = {{"mean_width", stats.mean}, {"K", static_cast<double>(k)}};
  return rep;
}

enum class AdvantageTailMode { kFixedOracle, kMaxOracle };

struct AdvantageTailOptions {
  AdvantageTailMode mode = AdvantageTailMode::kFixedOracle;
  std::optional<BooleanFunction> oracle;  // fixed mode; random if unset
  double rate_constant = 0.01;
  Index max_oracle_limit = 12;
};

// Fixed oracle: P(Delta(R|f) >= eps) <= 2 exp(-c eps^2 K N).
// Max oracle (M <= 12): P(Delta(R) >= mean + eps) <= 4 exp(-c eps^2 K N).
inline TailReport advantage_tail_bench(const AdversarySpec& adv, std::size_t k, std::size_t samples,
                                       const std::vector<double>& epsilons, const RngStream& rng,
                                       const AdvantageTailOptions& opts = {}) {
  detail::require_samples(samples, 1);
  detail::require(k >= 1, ErrorKind::kInvalidInput, "need K >= 1");
  const std::size_t n = static_cast<std::size_t>(adv.N());
  const double kn = static_cast<double>(k) * static_cast<double>(n);
  TailReport rep;
  rep.samples = samples;
  rep.thresholds = epsilons;

  if (opts.mode == AdvantageTailMode::kFixedOracle) {
    RngStream pick = rng.derive(~std::uint64_t{0});
    const BooleanFunction f = opts.oracle ? *opts.oracle : BooleanFunction::random(static_cast<std::size_t>(adv.M()), pick);
    detail::check_oracle(adv, f);
    const ComplexMatrix g = detail::acceptance_operator(adv, f);
    const RealMatrix gr = g.real();
    const double haar = g.trace().real() / static_cast<double>(n);
    const auto values = detail::draw_samples(samples, rng, [&](RngStream& s) {
      const RealMatrix states = FunctionFamily::random(k, n, s).phase_states();
      return std::abs((states.transpose() * gr * states).trace() / static_cast<double>(k) - haar);
    });
    rep.bound_name = "advantage-tail/fixed-oracle";
    rep.frequencies = detail::exceedance(values, epsilons);
    for (const double e : epsilons) rep.bound_values.push_back(2.0 * std::exp(-opts.rate_constant * e * e * kn));
    rep.extras = {{"mean_advantage", detail::sample_stats(values).mean}};
    return rep;
  }

  detail::require(adv.M() <= opts.max_oracle_limit, ErrorKind::kCapacity,
                  "max-oracle tail bench needs M <= " + std::to_string(opts.max_oracle_limit) + " (got " +
                      std::to_string(adv.M()) + "); use the fixed-oracle mode");
  const auto values = detail::draw_samples(samples, rng, [&](RngStream& s) {
    return max_advantage_bruteforce(adv, FunctionFamily::random(k, n, s)).value;
  });
  const double mean = detail::sample_stats(values).mean;
  std::vector<double> shifted;
  for (const double e : epsilons) shifted.push_back(mean + e);
  rep.bound_name = "advantage-tail/max-oracle";
  rep.frequencies = detail::exceedance(values, shifted);
  for (const double e : epsilons) rep.bound_values.push_back(4.0 * std::exp(-opts.rate_constant * e * e * kn));
  rep.extras = {{"mean_advantage", mean}};
  return rep;
}

// P(|X_R - 1| >= t) <= 2 exp(-c K min(t^2, t)).
inline TailReport x_statistic_tail_bench(int n, std::size_t k, std::size_t samples, const std::vector<double>& thresholds,
                                         const RngStream& rng, double rate_constant = 0.05) {
  detail::require_samples(samples, 1);
  const std::size_t dim = std::size_t{1} << n;
  const auto values = detail::draw_samples(samples, rng, [&](RngStream& s) {
    return std::abs(x_statistic(FunctionFamily::random(k, dim, s)) - 1.0);
  });
  TailReport rep;
  rep.bound_name = "x-statistic-tail";
  rep.samples = samples;
  rep.thresholds = thresholds;
  rep.frequencies = detail::exceedance(values, thresholds);
  for (const double t : thresholds)
    rep.bound_values.push_back(2.0 * std::exp(-rate_constant * static_cast<double>(k) * std::min(t * t, t)));
  return rep;
}

// The suite run by `phaselab bench` and by the acceptance checks. Every bench
// gets its own derived stream of `seed`.
inline std::vector<TailReport> default_bench_suite(std::uint64_t seed, std::size_t samples = 500) {
  const RngStream root(seed, 0xbe7c4ULL);
  std::vector<TailReport> out;
  RngStream setup = root.derive(0);

  std::vector<ComplexMatrix> diag;
  for (Index i = 0; i < 8; ++i) {
    ComplexMatrix e = ComplexMatrix::Zero(8, 8);
    e(i, i) = 1.0;
    diag.push_back(e);
  }
  out.push_back(rademacher_series_bench(diag, samples, root.derive(1)));
  std::vector<ComplexMatrix> dense;
  for (int i = 0; i < 12; ++i) {
    ComplexMatrix c(4, 6);
    for (Index a = 0; a < 4; ++a)
      for (Index b = 0; b < 6; ++b) c(a, b) = setup.complex_normal() / 4.0;
    dense.push_back(c);
  }
  out.push_back(rademacher_series_bench(dense, samples, root.derive(2)));

  out.push_back(matrix_hoeffding_bench(scalar_sign_sampler(0.7), 16, samples, root.derive(3)));
  const AdversarySpec small(random_isometry(8, 16, setup), random_projector(16, 8, setup));
  out.push_back(matrix_hoeffding_bench(rescaling_sampler(small, 2.0, 20000, root.derive(4)), 16, samples, root.derive(5)));
  out.push_back(matrix_hoeffding_bench(zero_sampler(4), 8, samples, root.derive(6)));

  out.push_back(complex_hoeffding_bench(std::vector<Complex>(64, Complex(1.0 / 8.0)), samples, root.derive(7)));
  std::vector<Complex> mixed(32);
  double norm2 = 0;
  for (auto& a : mixed) norm2 += std::norm(a = setup.complex_normal());
  for (auto& a : mixed) a /= std::sqrt(norm2);
  out.push_back(complex_hoeffding_bench(mixed, samples, root.derive(8)));

  const ComplexMatrix wide = random_isometry(16, 64, setup);
  out.push_back(subexponential_diagonal_bench(wide, samples, root.derive(9)));
  out.push_back(width_tail_bench(wide, 32, samples, {0.5, 1.0, 2.0}, root.derive(10)));

  const AdversarySpec big(random_isometry(64, 96, setup), random_projector(96, 48, setup));
  out.push_back(advantage_tail_bench(big, 32, samples, {0.05, 0.1, 0.2}, root.derive(11)));
  const AdversarySpec tiny(random_isometry(4, 10, setup), random_projector(10, 5, setup));
  AdvantageTailOptions max_mode;
  max_mode.mode = AdvantageTailMode::kMaxOracle;
  out.push_back(advantage_tail_bench(tiny, 4, samples, {0.05, 0.1, 0.2}, root.derive(12), max_mode));

  out.push_back(x_statistic_tail_bench(6, 16, samples, {0.5, 1.0, 2.0}, root.derive(13)));
  return out;
}

}  // namespace phaselab
