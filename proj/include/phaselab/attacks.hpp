#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"

namespace phaselab {

// Unnormalized in-place Walsh-Hadamard transform; length must be a power of two.
inline void fwht(std::span<double> a) {
  for (std::size_t h = 1; h < a.size(); h <<= 1)
    for (std::size_t i = 0; i < a.size(); i += h << 1)
      for (std::size_t j = i; j < i + h; ++j) {
        const double x = a[j], y = a[j + h];
        a[j] = x + y;
        a[j + h] = x - y;
      }
}

// Sylvester-ordered normalized Hadamard matrix on 2^n points.
inline ComplexMatrix hadamard_matrix(int n) {
  const Index dim = Index{1} << n;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dim));
  ComplexMatrix h(dim, dim);
  for (Index y = 0; y < dim; ++y)
    for (Index x = 0; x < dim; ++x) h(y, x) = std::popcount(static_cast<std::uint64_t>(x & y)) & 1 ? -scale : scale;
  return h;
}

namespace detail {

inline int require_power_of_two(std::size_t n) {
  require(n >= 1 && std::has_single_bit(n), ErrorKind::kInvalidInput,
          "N = " + std::to_string(n) + " is not a power of two; the Hadamard transform needs qubit structure");
  return std::countr_zero(n);
}

}  // namespace detail

// Outcome distribution of measuring H^{(x)n} psi_{R_k} for a uniformly random row k.
inline std::vector<double> hadamard_outcome_distribution(const FunctionFamily& r) {
  detail::require_power_of_two(r.N());
  const double n2 = static_cast<double>(r.N()) * static_cast<double>(r.N());
  std::vector<double> dist(r.N(), 0.0), row(r.N());
  for (std::size_t k = 0; k < r.K(); ++k) {
    for (std::size_t x = 0; x < r.N(); ++x) row[x] = r(k, x);
    fwht(row);
    for (std::size_t y = 0; y < r.N(); ++y) dist[y] += row[y] * row[y] / n2;
  }
  for (auto& p : dist) p /= static_cast<double>(r.K());
  return dist;
}

inline double hadamard_attack_exact_advantage(const FunctionFamily& r) {
  const auto dist = hadamard_outcome_distribution(r);
  const std::vector<double> uniform(r.N(), 1.0 / static_cast<double>(r.N()));
  return tv_distance(dist, uniform);
}

// (1/N) E_k (sum_x R_k(x))^2.
inline double x_statistic(const FunctionFamily& r) {
  double total = 0.0;
  for (std::size_t k = 0; k < r.K(); ++k) {
    double s = 0.0;
    for (std::size_t x = 0; x < r.N(); ++x) s += r(k, x);
    total += s * s;
  }
  return total / (static_cast<double>(r.N()) * static_cast<double>(r.K()));
}

// The measure-then-classify Hadamard attack written as a one-query adversary.
// One ancilla qubit in |+> sits next to the transformed input, index 2y + a.
// The oracle is +1 on (y, 0) and c(y) on (y, 1), so projecting the ancilla on
// |+> accepts outcome y exactly when c(y) = +1.
struct HadamardEncoding {
  AdversarySpec adversary;
  BooleanFunction oracle;
};

inline AdversarySpec hadamard_adversary(int n) {
  const Index dim = Index{1} << n;
  const ComplexMatrix h = hadamard_matrix(n);
  ComplexVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  ComplexMatrix ancilla_proj = plus * plus.adjoint();
  return AdversarySpec(kron(h, plus), kron(ComplexMatrix::Identity(dim, dim), ancilla_proj));
}

// Accept (guess "family") on outcomes more likely under the family than uniform.
inline HadamardEncoding hadamard_encoding(const FunctionFamily& r) {
  const int n = detail::require_power_of_two(r.N());
  const auto dist = hadamard_outcome_distribution(r);
  std::vector<std::int8_t> oracle(2 * r.N(), 1);
  const double uniform = 1.0 / static_cast<double>(r.N());
  for (std::size_t y = 0; y < r.N(); ++y) oracle[2 * y + 1] = dist[y] > uniform ? 1 : -1;
  return {hadamard_adversary(n), BooleanFunction(std::move(oracle))};
}

// Direct simulation of measure-then-classify: measure H psi, accept when the
// outcome is in the family-favoured set. Round t uses rng.derive(t).
inline GameTally simulate_hadamard_attack(const FunctionFamily& r, std::uint64_t trials, const RngStream& rng) {
  detail::require(trials >= 1, ErrorKind::kInvalidInput, "simulation needs trials >= 1");
  const std::size_t n = r.N();
  const auto dist = hadamard_outcome_distribution(r);
  std::vector<bool> accept(n);
  for (std::size_t y = 0; y < n; ++y) accept[y] = dist[y] > 1.0 / static_cast<double>(n);
  std::vector<std::vector<double>> row_cdf(r.K(), std::vector<double>(n));
  std::vector<double> buf(n);
  const double n2 = static_cast<double>(n) * static_cast<double>(n);
  for (std::size_t k = 0; k < r.K(); ++k) {
    for (std::size_t x = 0; x < n; ++x) buf[x] = r(k, x);
    fwht(buf);
    double c = 0;
    for (std::size_t y = 0; y < n; ++y) row_cdf[k][y] = (c += buf[y] * buf[y] / n2);
  }
  auto sample = [&](const std::vector<double>& cdf, double u) {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u * cdf.back());
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), n - 1);
  };
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(trials, 64));
  std::vector<std::uint64_t> wins(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const ChunkRange range = chunk_range(trials, chunks, c);
    std::vector<double> amp(n), cdf(n);
    std::uint64_t local = 0;
    for (std::size_t t = range.begin; t < range.end; ++t) {
      RngStream s = rng.derive(t);
      const int b = s.bit() ? 1 : 0;
      std::size_t y;
      if (b == 0) {
        y = sample(row_cdf[s.below(r.K())], s.uniform());
      } else {
        for (std::size_t x = 0; x < n; ++x) amp[x] = s.bit() ? -1.0 : 1.0;
        fwht(amp);
        double acc = 0;
        for (std::size_t j = 0; j < n; ++j) cdf[j] = (acc += amp[j] * amp[j] / n2);
        y = sample(cdf, s.uniform());
      }
      const int guess = accept[y] ? 0 : 1;
      local += guess == b;
    }
    wins[c] = local;
  });
  GameTally tally{trials, 0};
  for (const auto w : wins) tally.wins += w;
  return tally;
}

struct HadamardAttackReport {
  int n = 0;
  std::size_t K = 0;
  std::size_t trials = 0;
  double exact_advantage = 0.0;
  double exact_advantage_std = 0.0;
  double half_mean_abs_x_deviation = 0.0;
  double monte_carlo_advantage = std::numeric_limits<double>::quiet_NaN();
  std::uint64_t game_trials = 0;
  double x_statistic_mean = 0.0;
  double x_statistic_variance = 0.0;
};

// Averages over `trials` fresh random families; family i is drawn from
// rng.derive(i). When game_trials > 0 each family is also attacked by direct
// simulation and the advantage estimate 2 * win_rate - 1 is averaged.
inline HadamardAttackReport run_hadamard_attack(int n, std::size_t k, std::size_t trials, std::uint64_t game_trials,
                                                const RngStream& rng) {
  detail::require(n >= 1 && n <= 20, ErrorKind::kInvalidInput, "Hadamard attack needs 1 <= n <= 20");
  detail::require(k >= 1 && trials >= 1, ErrorKind::kInvalidInput, "Hadamard attack needs K >= 1 and trials >= 1");
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> adv(trials), xs(trials), mc(trials, 0.0);
  parallel_for(trials, [&](std::size_t i) {
    RngStream s = rng.derive(i);
    const auto r = FunctionFamily::random(k, dim, s);
    adv[i] = hadamard_attack_exact_advantage(r);
    xs[i] = x_statistic(r);
    if (game_trials > 0) mc[i] = 2.0 * simulate_hadamard_attack(r, game_trials, s.derive(1)).win_rate() - 1.0;
  });
  HadamardAttackReport rep;
  rep.n = n;
  rep.K = k;
  rep.trials = trials;
  rep.game_trials = game_trials;
  const double t = static_cast<double>(trials);
  double sa = 0, sx = 0, sdev = 0, smc = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    sa += adv[i];
    sx += xs[i];
    sdev += std::abs(xs[i] - 1.0);
    smc += mc[i];
  }
  rep.exact_advantage = sa / t;
  rep.x_statistic_mean = sx / t;
  rep.half_mean_abs_x_deviation = sdev / (2.0 * t);
  double va = 0, vx = 0;
  for (std::size_t i = 0; i < trials; ++i) {
    va += (adv[i] - rep.exact_advantage) * (adv[i] - rep.exact_advantage);
    vx += (xs[i] - rep.x_statistic_mean) * (xs[i] - rep.x_statistic_mean);
  }
  rep.exact_advantage_std = trials > 1 ? std::sqrt(va / (t - 1)) : 0.0;
  rep.x_statistic_variance = trials > 1 ? vx / (t - 1) : 0.0;
  if (game_trials > 0) rep.monte_carlo_advantage = smc / t;
  return rep;
}

// Orthonormal basis (N x rank) of span{psi_{R_k}} via column-pivoted QR with a
// relative pivot threshold of 1e-10.
inline ComplexMatrix family_span_basis(const FunctionFamily& r) {
  const ComplexMatrix states = r.phase_states().cast<Complex>();
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(states);
  qr.setThreshold(1e-10);
  const Index rank = qr.rank();
  return ComplexMatrix(qr.householderQ()) * ComplexMatrix::Identity(states.rows(), rank);
}

// V = Id and Pi = projector onto the span of the family's states.
inline AdversarySpec omniscient_distinguisher(const FunctionFamily& r) {
  const ComplexMatrix q = family_span_basis(r);
  const Index n = static_cast<Index>(r.N());
  ComplexMatrix pi = q * q.adjoint();
  pi = (pi + pi.adjoint()) / 2.0;
  return AdversarySpec(ComplexMatrix::Identity(n, n), pi);
}

// Family states are accepted with certainty, the mixed state with rank/N.
inline double omniscient_advantage(const FunctionFamily& r) {
  return 1.0 - static_cast<double>(family_span_basis(r).cols()) / static_cast<double>(r.N());
}

// Largest advantage any single-copy measurement can reach on this family:
// half the trace norm of E_k |psi_k><psi_k| - I/N. Exceeds the span projector
// when some nonzero eigenvalue of the family's average state is below 1/N.
inline double optimal_measurement_advantage(const FunctionFamily& r) {
  const RealMatrix s = r.phase_states();
  const Index n = s.rows();
  const RealMatrix rho = s * s.transpose() / static_cast<double>(r.K()) - RealMatrix::Identity(n, n) / static_cast<double>(n);
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(rho, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

// V: psi -> psi (x) advice, with a caller-supplied measurement on C^N (x) C^D.
inline AdversarySpec advice_state_adversary(const ComplexMatrix& pi, const UnitVector& advice) {
  const Index d = advice.dim();
  detail::require(pi.rows() == pi.cols(), ErrorKind::kDimension, "measurement must be square");
  detail::require(pi.rows() % d == 0 && pi.rows() >= d, ErrorKind::kDimension,
                  "measurement dimension " + std::to_string(pi.rows()) + " is not a multiple of advice dimension " +
                      std::to_string(d));
  const Index n = pi.rows() / d;
  return AdversarySpec(kron(ComplexMatrix::Identity(n, n), advice.amplitudes()), pi);
}

inline constexpr int kBvMaxQueryBits = 16;

// Query dimension 2^{K N} of the full-learn attack.
inline std::uint64_t bv_query_dimension(std::size_t k, std::size_t n) {
  const std::size_t bits = k * n;
  if (bits > static_cast<std::size_t>(kBvMaxQueryBits)) {
    throw Error(ErrorKind::kCapacity, "full-learn attack needs a query of dimension 2^" + std::to_string(bits) +
                                          " (K*N = " + std::to_string(bits) + "), above the 2^" +
                                          std::to_string(kBvMaxQueryBits) + " cap");
  }
  return std::uint64_t{1} << bits;
}

inline constexpr Index kBvMaxDenseDimension = 1024;

struct BvAttack {
  AdversarySpec adversary;
  BooleanFunction oracle;
};

// Full-learn attack on a tiny family. The query register holds z in
// {0,1}^{KN}; the oracle is the parity of R's entries selected by z, bit k*N + x
// standing for R(k, x). Querying on |+> leaves H|r> in the register, where r is
// R's truth table, and Pi = sum_r P_r (x) H|r><r|H with P_r the span projector
// of the family encoded by r. Index layout: x * 2^{KN} + z.
inline BvAttack bv_full_learn_attack(const FunctionFamily& r) {
  const std::uint64_t q = bv_query_dimension(r.K(), r.N());
  const Index n = static_cast<Index>(r.N());
  const Index m = n * static_cast<Index>(q);
  detail::require(m <= kBvMaxDenseDimension, ErrorKind::kCapacity,
                  "full-learn attack would need a dense " + std::to_string(m) + "-dimensional space, above " +
                      std::to_string(kBvMaxDenseDimension));
  const int bits = static_cast<int>(r.K() * r.N());
  const double scale = 1.0 / std::sqrt(static_cast<double>(q));
  auto hadamard_entry = [&](std::uint64_t a, std::uint64_t b) { return std::popcount(a & b) & 1 ? -scale : scale; };

  ComplexMatrix pi = ComplexMatrix::Zero(m, m);
  for (std::uint64_t code = 0; code < q; ++code) {
    std::vector<std::int8_t> entries(static_cast<std::size_t>(bits));
    for (int j = 0; j < bits; ++j) entries[static_cast<std::size_t>(j)] = (code >> j) & 1U ? -1 : 1;
    const ComplexMatrix basis = family_span_basis(FunctionFamily(r.K(), r.N(), std::move(entries)));
    const ComplexMatrix p = basis * basis.adjoint();
    for (Index x = 0; x < n; ++x)
      for (Index xp = 0; xp < n; ++xp) {
        const Complex pv = p(x, xp);
        if (pv == Complex(0.0)) continue;
        for (std::uint64_t z = 0; z < q; ++z) {
          const Complex left = pv * hadamard_entry(code, z);
          for (std::uint64_t zp = 0; zp < q; ++zp)
            pi(x * static_cast<Index>(q) + static_cast<Index>(z), xp * static_cast<Index>(q) + static_cast<Index>(zp)) +=
                left * hadamard_entry(code, zp);
        }
      }
  }
  pi = (pi + pi.adjoint()) / 2.0;
  ComplexVector plus = ComplexVector::Constant(static_cast<Index>(q), scale);
  AdversarySpec adv(kron(ComplexMatrix::Identity(n, n), plus), pi);

  std::uint64_t truth = 0;
  for (std::size_t k = 0; k < r.K(); ++k)
    for (std::size_t x = 0; x < r.N(); ++x)
      if (r(k, x) < 0) truth |= std::uint64_t{1} << (k * r.N() + x);
  std::vector<std::int8_t> oracle(static_cast<std::size_t>(m));
  for (Index x = 0; x < n; ++x)
    for (std::uint64_t z = 0; z < q; ++z)
      oracle[static_cast<std::size_t>(x * static_cast<Index>(q) + static_cast<Index>(z))] =
          std::popcount(z & truth) & 1 ? -1 : 1;
  return {std::move(adv), BooleanFunction(std::move(oracle))};
}

}  // namespace phaselab
