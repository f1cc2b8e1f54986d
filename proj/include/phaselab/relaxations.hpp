#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "phaselab/decomposition.hpp"
#include "phaselab/error.hpp"
#include "phaselab/game.hpp"
#include "phaselab/hypercube.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"

namespace phaselab {

struct MonteCarloValue {
  double value = 0.0;
  double standard_error = 0.0;
};

namespace detail {

// Pi o (conj(A) B^T) / K, i.e. E_k D_{A,k}^dag Pi D_{B,k} for diagonal D's
// stored as columns.
inline ComplexMatrix sandwich(const ComplexMatrix& pi, const ComplexMatrix& a, const ComplexMatrix& b) {
  return pi.cwiseProduct(a.conjugate() * b.transpose()) / static_cast<double>(a.cols());
}

inline void check_pair(const FunctionFamily& r, const FunctionFamily& rp) {
  require(r.K() == rp.K() && r.N() == rp.N(), ErrorKind::kDimension,
          "paired families differ in shape (" + std::to_string(r.K()) + "x" + std::to_string(r.N()) + " vs " +
              std::to_string(rp.K()) + "x" + std::to_string(rp.N()) + ")");
}

}  // namespace detail

// E_h D_h^dag Pi D_h in closed form: entry (i, j) = Pi_ij (V V^dag)_ji / (N sqrt(wt_i wt_j)).
inline ComplexMatrix average_rescaled_projector(const AdversarySpec& adv, const IsometryWeights& w) {
  const ComplexMatrix gram = adv.V() * adv.V().adjoint();
  ComplexMatrix out(adv.M(), adv.M());
  const double n = static_cast<double>(adv.N());
  for (Index j = 0; j < adv.M(); ++j)
    for (Index i = 0; i < adv.M(); ++i)
      out(i, j) = w.masked(i) || w.masked(j) ? Complex(0.0)
                                             : adv.Pi()(i, j) * gram(j, i) / (n * std::sqrt(w[i] * w[j]));
  return out;
}

// The Hermitian matrix whose operator norm is the spectral relaxation.
inline ComplexMatrix spectral_relaxation_matrix(const AdversarySpec& adv, const FunctionFamily& r) {
  detail::check_family(adv, r);
  const IsometryWeights w = isometry_weights(adv.V());
  const ComplexMatrix d = rescaling_columns(adv.V(), w, r);
  const ComplexMatrix diff = detail::sandwich(adv.Pi(), d, d) - average_rescaled_projector(adv, w);
  return (diff + diff.adjoint()) / 2.0;
}

inline double spectral_relaxation(const AdversarySpec& adv, const FunctionFamily& r) {
  return operator_norm(spectral_relaxation_matrix(adv, r));
}

inline constexpr std::size_t kTruncationSamples = 10000;

// Same as spectral_relaxation with every D truncated at B. The average over h
// has no closed form after truncation and is estimated from `samples` random h.
// The reported error is the Frobenius norm of the entrywise standard errors,
// which bounds the operator-norm error of the estimate to first order.
inline MonteCarloValue truncated_spectral_relaxation(const AdversarySpec& adv, const FunctionFamily& r,
                                                     const TruncationConfig& cfg, const RngStream& rng,
                                                     std::size_t samples = kTruncationSamples) {
  detail::check_family(adv, r);
  detail::require(samples >= 2, ErrorKind::kInvalidInput, "truncated relaxation needs at least 2 samples");
  const IsometryWeights w = isometry_weights(adv.V());
  const ComplexMatrix family_term =
      detail::sandwich(adv.Pi(), truncate_columns(rescaling_columns(adv.V(), w, r), cfg),
                       truncate_columns(rescaling_columns(adv.V(), w, r), cfg));

  constexpr std::size_t kBatch = 256;
  const std::size_t batches = (samples + kBatch - 1) / kBatch;
  std::vector<ComplexMatrix> sums(batches);
  std::vector<RealMatrix> squares(batches);
  parallel_for(batches, [&](std::size_t b) {
    const ChunkRange range{b * kBatch, std::min(samples, (b + 1) * kBatch)};
    RngStream stream = rng.derive(b);
    const auto hs = FunctionFamily::random(range.end - range.begin, static_cast<std::size_t>(adv.N()), stream);
    const ComplexMatrix d = truncate_columns(rescaling_columns(adv.V(), w, hs), cfg);
    ComplexMatrix sum = ComplexMatrix::Zero(adv.M(), adv.M());
    RealMatrix sq = RealMatrix::Zero(adv.M(), adv.M());
    for (Index s = 0; s < d.cols(); ++s) {
      const ComplexMatrix term = adv.Pi().cwiseProduct(d.col(s).conjugate() * d.col(s).transpose());
      sum += term;
      sq += term.cwiseAbs2();
    }
    sums[b] = std::move(sum);
    squares[b] = std::move(sq);
  });
  ComplexMatrix mean = ComplexMatrix::Zero(adv.M(), adv.M());
  RealMatrix second = RealMatrix::Zero(adv.M(), adv.M());
  for (std::size_t b = 0; b < batches; ++b) {
    mean += sums[b];
    second += squares[b];
  }
  const double n = static_cast<double>(samples);
  mean /= n;
  const RealMatrix variance = (second / n - mean.cwiseAbs2()).cwiseMax(0.0) * (n / (n - 1.0));
  ComplexMatrix diff = family_term - mean;
  diff = (diff + diff.adjoint()) / 2.0;
  return {operator_norm(diff), std::sqrt(variance.sum() / n)};
}

inline double decoupled_spectral_relaxation(const AdversarySpec& adv, const FunctionFamily& r,
                                            const FunctionFamily& rp) {
  detail::check_family(adv, r);
  detail::check_pair(r, rp);
  const IsometryWeights w = isometry_weights(adv.V());
  return operator_norm(
      detail::sandwich(adv.Pi(), rescaling_columns(adv.V(), w, r), rescaling_columns(adv.V(), w, rp)));
}

// |E_k psi_{R_k}^dag V^dag O_f Pi O_f V psi_{R'_k}|, evaluated directly.
inline double decoupled_advantage(const AdversarySpec& adv, const FunctionFamily& r, const FunctionFamily& rp,
                                  const BooleanFunction& f) {
  detail::check_family(adv, r);
  detail::check_pair(r, rp);
  detail::check_oracle(adv, f);
  const ComplexMatrix w = detail::oracle_rotated(adv, f);
  Complex total = 0.0;
  for (std::size_t k = 0; k < r.K(); ++k) {
    const ComplexVector a = w * phase_state(r.row(k)).amplitudes();
    const ComplexVector b = w * phase_state(rp.row(k)).amplitudes();
    total += a.dot(adv.Pi() * b);
  }
  return std::abs(total / static_cast<double>(r.K()));
}

inline AdvantageResult max_decoupled_advantage_bruteforce(const AdversarySpec& adv, const FunctionFamily& r,
                                                          const FunctionFamily& rp,
                                                          Index cutoff = kDefaultBruteForceCutoff) {
  detail::check_family(adv, r);
  detail::check_pair(r, rp);
  detail::require(adv.M() <= cutoff, ErrorKind::kCapacity,
                  "decoupled brute force over 2^" + std::to_string(adv.M()) + " oracle functions exceeds the cutoff");
  const ComplexMatrix u = adv.V() * r.phase_states().cast<Complex>();
  const ComplexMatrix up = adv.V() * rp.phase_states().cast<Complex>();
  const ComplexMatrix c = detail::sandwich(adv.Pi(), u, up);
  const ComplexMatrix symmetric = (c + c.transpose()) / 2.0;
  SignSearchResult best = max_abs_quadratic_exhaustive<Complex>(symmetric);
  return {best.value, BooleanFunction(std::move(best.signs))};
}

// Projective measurement with `outcomes` elements: the columns of a random
// unitary split into near-equal consecutive blocks.
inline std::vector<ComplexMatrix> random_measurement(Index dim, Index outcomes, RngStream& rng) {
  detail::require(outcomes >= 1 && outcomes <= dim, ErrorKind::kInvalidInput,
                  "need 1 <= outcomes <= dim for a random measurement");
  const ComplexMatrix u = random_isometry(dim, dim, rng);
  std::vector<ComplexMatrix> out;
  for (Index i = 0; i < outcomes; ++i) {
    const auto range = chunk_range(static_cast<std::size_t>(dim), static_cast<std::size_t>(outcomes), static_cast<std::size_t>(i));
    const ComplexMatrix block = u.middleCols(static_cast<Index>(range.begin), static_cast<Index>(range.end - range.begin));
    out.push_back(block * block.adjoint());
  }
  return out;
}

enum class SubsetSearch { kBrute, kGreedy };

struct SubsetSearchOptions {
  std::size_t restarts = 32;
  std::uint64_t seed = 0;
  Index brute_limit = 20;
};

struct SubsetNormResult {
  double value = 0.0;
  std::vector<std::size_t> subset;
};

namespace detail {

// Per-outcome contributions A_i = E_k (<psi_k| x I) P_i (|psi_k> x I) - tr_1(P_i)/N,
// each (D/N) x (D/N), so the objective for S is ||sum_{i in S} A_i||.
inline std::vector<ComplexMatrix> subset_contributions(const std::vector<ComplexMatrix>& projectors,
                                                       const std::vector<UnitVector>& states) {
  require(!projectors.empty(), ErrorKind::kInvalidInput, "measurement needs at least one projector");
  require(!states.empty(), ErrorKind::kInvalidInput, "need at least one state");
  const Index n = states.front().dim();
  const Index dim = projectors.front().rows();
  for (const auto& s : states) require(s.dim() == n, ErrorKind::kDimension, "states differ in dimension");
  require(dim % n == 0, ErrorKind::kDimension,
          "ambient dimension " + std::to_string(dim) + " is not divisible by N = " + std::to_string(n));
  ComplexMatrix total = ComplexMatrix::Zero(dim, dim);
  for (std::size_t i = 0; i < projectors.size(); ++i) {
    const auto& p = projectors[i];
    require(p.rows() == dim && p.cols() == dim, ErrorKind::kDimension, "projectors differ in dimension");
    const double res = projector_residual(p);
    require(res <= kDerivedTol, ErrorKind::kInvalidInput,
            "measurement element " + std::to_string(i) + " is not a projector (residual " + detail::sci(res) + ")");
    total += p;
  }
  const double completeness = max_abs(total - ComplexMatrix::Identity(dim, dim));
  require(completeness <= kDerivedTol, ErrorKind::kInvalidInput,
          "measurement projectors do not sum to the identity (residual " + detail::sci(completeness) + ")");

  const Index d = dim / n;
  const ComplexMatrix id = ComplexMatrix::Identity(d, d);
  std::vector<ComplexMatrix> embeds;
  for (const auto& s : states) embeds.push_back(kron(s.amplitudes(), id));
  std::vector<ComplexMatrix> out;
  out.reserve(projectors.size());
  for (const auto& p : projectors) {
    ComplexMatrix a = ComplexMatrix::Zero(d, d);
    for (const auto& e : embeds) a += e.adjoint() * p * e;
    a /= static_cast<double>(states.size());
    for (Index x = 0; x < n; ++x) a -= p.block(x * d, x * d, d, d) / static_cast<double>(n);
    out.push_back((a + a.adjoint()) / 2.0);
  }
  return out;
}

inline double hermitian_norm(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(a, Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
}

inline std::vector<std::size_t> mask_to_subset(std::uint64_t mask) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; mask != 0; ++i, mask >>= 1)
    if (mask & 1U) out.push_back(i);
  return out;
}

}  // namespace detail

// max over subsets S of the outcome set of ||E_k (<psi_k| x I) P_S (|psi_k> x I) - tr_1(P_S)/N||,
// where P_S = sum_{i in S} P_i. Brute force returns the lowest-mask maximizer.
inline SubsetNormResult subset_norm_conjecture(const std::vector<ComplexMatrix>& projectors,
                                               const std::vector<UnitVector>& states, SubsetSearch mode,
                                               const SubsetSearchOptions& opts = {}) {
  const std::vector<ComplexMatrix> contrib = detail::subset_contributions(projectors, states);
  const Index m = static_cast<Index>(contrib.size());
  const Index d = contrib.front().rows();
  auto value_of = [&](const std::vector<std::size_t>& subset) {
    ComplexMatrix acc = ComplexMatrix::Zero(d, d);
    for (const auto i : subset) acc += contrib[i];
    return detail::hermitian_norm(acc);
  };

  if (mode == SubsetSearch::kBrute) {
    detail::require(m <= opts.brute_limit, ErrorKind::kCapacity,
                    "brute-force subset search over 2^" + std::to_string(m) + " subsets exceeds M <= " +
                        std::to_string(opts.brute_limit) + "; use greedy mode");
    const std::uint64_t total = std::uint64_t{1} << m;
    const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(total, 256));
    std::vector<std::pair<double, std::uint64_t>> best(chunks, {-1.0, 0});
    parallel_for(chunks, [&](std::size_t c) {
      const ChunkRange range = chunk_range(total, chunks, c);
      std::uint64_t gray = range.begin ^ (range.begin >> 1);
      ComplexMatrix acc = ComplexMatrix::Zero(d, d);
      for (const auto i : detail::mask_to_subset(gray)) acc += contrib[i];
      auto local = best[c];
      for (std::uint64_t i = range.begin; i < range.end; ++i) {
        const double v = detail::hermitian_norm(acc);
        if (v > local.first + detail::kTieTol || (std::abs(v - local.first) <= detail::kTieTol && gray < local.second))
          local = {v, gray};
        if (i + 1 < range.end) {
          const int bit = std::countr_zero(i + 1);
          gray ^= std::uint64_t{1} << bit;
          if ((gray >> bit) & 1U)
            acc += contrib[static_cast<std::size_t>(bit)];
          else
            acc -= contrib[static_cast<std::size_t>(bit)];
        }
      }
      best[c] = local;
    });
    auto overall = best.front();
    for (const auto& b : best)
      if (b.first > overall.first + detail::kTieTol ||
          (std::abs(b.first - overall.first) <= detail::kTieTol && b.second < overall.second))
        overall = b;
    SubsetNormResult out;
    out.subset = detail::mask_to_subset(overall.second);
    out.value = value_of(out.subset);
    return out;
  }

  // Greedy: from a random singleton, scan indices in a random order and accept
  // the first addition that improves the value; stop when none does.
  detail::require(opts.restarts >= 1, ErrorKind::kInvalidInput, "greedy search needs restarts >= 1");
  const RngStream root(opts.seed, 0x5b5e7ULL);
  std::vector<SubsetNormResult> results(opts.restarts);
  parallel_for(opts.restarts, [&](std::size_t r) {
    RngStream stream = root.derive(r);
    std::vector<bool> in(static_cast<std::size_t>(m), false);
    const auto first = static_cast<std::size_t>(stream.below(static_cast<std::uint64_t>(m)));
    in[first] = true;
    ComplexMatrix acc = contrib[first];
    double current = detail::hermitian_norm(acc);
    std::vector<std::size_t> order(static_cast<std::size_t>(m));
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    bool improved = true;
    while (improved) {
      improved = false;
      for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[stream.below(i)]);
      for (const auto i : order) {
        if (in[i]) continue;
        const double v = detail::hermitian_norm(acc + contrib[i]);
        if (v > current + 1e-14) {
          in[i] = true;
          acc += contrib[i];
          current = v;
          improved = true;
          break;
        }
      }
    }
    SubsetNormResult res;
    for (std::size_t i = 0; i < in.size(); ++i)
      if (in[i]) res.subset.push_back(i);
    res.value = current;
    results[r] = std::move(res);
  });
  std::size_t winner = 0;
  for (std::size_t r = 1; r < results.size(); ++r)
    if (results[r].value > results[winner].value + detail::kTieTol) winner = r;
  SubsetNormResult out = std::move(results[winner]);
  out.value = value_of(out.subset);
  return out;
}

}  // namespace phaselab
