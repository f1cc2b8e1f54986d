#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/hypercube.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"
#include "phaselab/rng.hpp"

namespace phaselab {

// A +-1 valued function on [0, L).
class BooleanFunction {
 public:
  BooleanFunction() = default;

  explicit BooleanFunction(std::vector<std::int8_t> values) : values_(std::move(values)) {
    for (std::size_t i = 0; i < values_.size(); ++i)
      detail::require(values_[i] == 1 || values_[i] == -1, ErrorKind::kInvalidInput,
                      "boolean function entry " + std::to_string(i) + " is " + std::to_string(values_[i]) +
                          ", expected +1 or -1");
  }

  static BooleanFunction constant(std::size_t length, int value = 1) {
    detail::require(value == 1 || value == -1, ErrorKind::kInvalidInput, "constant must be +1 or -1");
    return BooleanFunction(std::vector<std::int8_t>(length, static_cast<std::int8_t>(value)));
  }

  static BooleanFunction random(std::size_t length, RngStream& rng) {
    std::vector<std::int8_t> v(length);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < length; ++i) {
      if (i % 64 == 0) bits = rng.next_u64();
      v[i] = (bits >> (i % 64)) & 1U ? -1 : 1;
    }
    return BooleanFunction(std::move(v));
  }

  std::size_t size() const { return values_.size(); }
  int operator[](std::size_t i) const { return values_[i]; }
  std::span<const std::int8_t> values() const { return values_; }

  BooleanFunction negated() const {
    auto v = values_;
    for (auto& x : v) x = static_cast<std::int8_t>(-x);
    return BooleanFunction(std::move(v));
  }

  RealVector as_vector() const {
    RealVector out(static_cast<Index>(size()));
    for (std::size_t i = 0; i < size(); ++i) out(static_cast<Index>(i)) = values_[i];
    return out;
  }

  friend bool operator==(const BooleanFunction&, const BooleanFunction&) = default;

 private:
  std::vector<std::int8_t> values_;
};

// K rows of +-1 functions on [0, N), stored row-major.
class FunctionFamily {
 public:
  FunctionFamily(std::size_t rows, std::size_t length, std::vector<std::int8_t> values)
      : rows_(rows), length_(length), values_(std::move(values)) {
    detail::require(rows >= 1 && length >= 1, ErrorKind::kInvalidInput, "function family needs K >= 1 and N >= 1");
    detail::require(values_.size() == rows * length, ErrorKind::kInvalidInput,
                    "function family has " + std::to_string(values_.size()) + " entries, expected K*N = " +
                        std::to_string(rows * length));
    for (std::size_t i = 0; i < values_.size(); ++i)
      detail::require(values_[i] == 1 || values_[i] == -1, ErrorKind::kInvalidInput,
                      "function family entry " + std::to_string(i) + " is " + std::to_string(values_[i]) +
                          ", expected +1 or -1");
  }

  static FunctionFamily from_rows(const std::vector<BooleanFunction>& rows) {
    detail::require(!rows.empty(), ErrorKind::kInvalidInput, "function family needs at least one row");
    const std::size_t n = rows.front().size();
    std::vector<std::int8_t> v;
    v.reserve(rows.size() * n);
    for (const auto& r : rows) {
      detail::require(r.size() == n, ErrorKind::kDimension, "function family rows differ in length");
      v.insert(v.end(), r.values().begin(), r.values().end());
    }
    return FunctionFamily(rows.size(), n, std::move(v));
  }

  static FunctionFamily random(std::size_t rows, std::size_t length, RngStream& rng) {
    std::vector<std::int8_t> v(rows * length);
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i % 64 == 0) bits = rng.next_u64();
      v[i] = (bits >> (i % 64)) & 1U ? -1 : 1;
    }
    return FunctionFamily(rows, length, std::move(v));
  }

  std::size_t K() const { return rows_; }
  std::size_t N() const { return length_; }
  int operator()(std::size_t k, std::size_t x) const { return values_[k * length_ + x]; }
  std::span<const std::int8_t> values() const { return values_; }

  BooleanFunction row(std::size_t k) const {
    return BooleanFunction(std::vector<std::int8_t>(values_.begin() + static_cast<std::ptrdiff_t>(k * length_),
                                                    values_.begin() + static_cast<std::ptrdiff_t>((k + 1) * length_)));
  }

  // N x K real matrix whose column k is the phase state of row k.
  RealMatrix phase_states() const {
    RealMatrix out(static_cast<Index>(length_), static_cast<Index>(rows_));
    const double scale = 1.0 / std::sqrt(static_cast<double>(length_));
    for (std::size_t k = 0; k < rows_; ++k)
      for (std::size_t x = 0; x < length_; ++x)
        out(static_cast<Index>(x), static_cast<Index>(k)) = scale * (*this)(k, x);
    return out;
  }

  friend bool operator==(const FunctionFamily&, const FunctionFamily&) = default;

 private:
  std::size_t rows_;
  std::size_t length_;
  std::vector<std::int8_t> values_;
};

// One-query adversary in normal form: isometry V (M x N) then phase oracle on
// C^M, phase oracle again, measurement projector Pi (M x M).
class AdversarySpec {
 public:
  AdversarySpec(ComplexMatrix v, ComplexMatrix pi, double tol = kStructuralTol) : v_(std::move(v)), pi_(std::move(pi)) {
    detail::require(v_.rows() >= 1 && v_.cols() >= 1, ErrorKind::kDimension, "adversary isometry is empty");
    detail::require(v_.rows() >= v_.cols(), ErrorKind::kDimension,
                    "adversary needs M >= N (got M = " + std::to_string(v_.rows()) +
                        ", N = " + std::to_string(v_.cols()) + ")");
    detail::require(pi_.rows() == v_.rows() && pi_.cols() == v_.rows(), ErrorKind::kDimension,
                    "projector must be M x M with M = " + std::to_string(v_.rows()));
    detail::require(v_.allFinite() && pi_.allFinite(), ErrorKind::kValidation, "adversary has non-finite entries");
    const double v_res = isometry_residual(v_);
    detail::require(v_res <= tol, ErrorKind::kValidation,
                    "V is not an isometry: max |V^dag V - I| = " + detail::sci(v_res));
    const double p_res = projector_residual(pi_);
    detail::require(p_res <= tol, ErrorKind::kValidation,
                    "Pi is not an orthogonal projector: residual " + detail::sci(p_res));
  }

  Index N() const { return v_.cols(); }
  Index M() const { return v_.rows(); }
  const ComplexMatrix& V() const { return v_; }
  const ComplexMatrix& Pi() const { return pi_; }

 private:
  ComplexMatrix v_;
  ComplexMatrix pi_;
};

struct GameOutcome {
  int challenge_bit = 0;
  int guess = 0;
  bool win() const { return challenge_bit == guess; }
};

namespace detail {

inline void check_oracle(const AdversarySpec& adv, const BooleanFunction& f) {
  require(static_cast<Index>(f.size()) == adv.M(), ErrorKind::kDimension,
          "oracle function has length " + std::to_string(f.size()) + ", adversary has M = " + std::to_string(adv.M()));
}

inline void check_family(const AdversarySpec& adv, const FunctionFamily& r) {
  require(static_cast<Index>(r.N()) == adv.N(), ErrorKind::kDimension,
          "family has N = " + std::to_string(r.N()) + ", adversary has N = " + std::to_string(adv.N()));
}

// O_f V: rows of V scaled by f.
inline ComplexMatrix oracle_rotated(const AdversarySpec& adv, const BooleanFunction& f) {
  ComplexMatrix w = adv.V();
  for (Index i = 0; i < w.rows(); ++i)
    if (f[static_cast<std::size_t>(i)] < 0) w.row(i) *= -1.0;
  return w;
}

// G = V^dag O_f Pi O_f V, the N x N acceptance operator.
inline ComplexMatrix acceptance_operator(const AdversarySpec& adv, const BooleanFunction& f) {
  const ComplexMatrix w = oracle_rotated(adv, f);
  return w.adjoint() * adv.Pi() * w;
}

}  // namespace detail

inline UnitVector phase_state(const BooleanFunction& h) {
  detail::require(h.size() >= 1, ErrorKind::kInvalidInput, "phase state needs L >= 1");
  const double scale = 1.0 / std::sqrt(static_cast<double>(h.size()));
  ComplexVector amps(static_cast<Index>(h.size()));
  for (std::size_t x = 0; x < h.size(); ++x) amps(static_cast<Index>(x)) = scale * h[x];
  return UnitVector(std::move(amps));
}

inline double acceptance_probability(const AdversarySpec& adv, const BooleanFunction& h, const BooleanFunction& f) {
  detail::require(static_cast<Index>(h.size()) == adv.N(), ErrorKind::kDimension,
                  "challenge function has length " + std::to_string(h.size()) + ", adversary has N = " +
                      std::to_string(adv.N()));
  detail::check_oracle(adv, f);
  ComplexVector u = adv.V() * phase_state(h).amplitudes();
  for (Index i = 0; i < u.size(); ++i)
    if (f[static_cast<std::size_t>(i)] < 0) u(i) = -u(i);
  const double p = u.dot(adv.Pi() * u).real();
  return std::clamp(p, 0.0, 1.0);
}

// E_h p(h|f) = tr(V^dag O_f Pi O_f V) / N, since E_h |psi_h><psi_h| = I/N.
inline double haar_average_acceptance(const AdversarySpec& adv, const BooleanFunction& f) {
  detail::check_oracle(adv, f);
  const ComplexMatrix w = detail::oracle_rotated(adv, f);
  const double tr = (w.adjoint() * adv.Pi() * w).trace().real();
  return std::clamp(tr / static_cast<double>(adv.N()), 0.0, 1.0);
}

// E_k p(R_k|f) - E_h p(h|f), before taking the absolute value.
inline double signed_advantage_given_f(const AdversarySpec& adv, const FunctionFamily& r, const BooleanFunction& f) {
  detail::check_family(adv, r);
  detail::check_oracle(adv, f);
  double family_side = 0.0;
  for (std::size_t k = 0; k < r.K(); ++k) family_side += acceptance_probability(adv, r.row(k), f);
  family_side /= static_cast<double>(r.K());
  return family_side - haar_average_acceptance(adv, f);
}

inline double advantage_given_f(const AdversarySpec& adv, const FunctionFamily& r, const BooleanFunction& f) {
  return std::abs(signed_advantage_given_f(adv, r, f));
}

// Real symmetric S with signed advantage(f) = f^T S f. With u_k = V psi_{R_k}
// and rho = E_k u_k u_k^dag - V V^dag / N, expanding O_f Pi O_f entrywise gives
// S_ij = Re(Pi_ij rho_ji).
class AdvantageKernel {
 public:
  AdvantageKernel(const AdversarySpec& adv, const FunctionFamily& r) {
    detail::check_family(adv, r);
    const ComplexMatrix u = adv.V() * r.phase_states().cast<Complex>();
    const ComplexMatrix rho = u * u.adjoint() / static_cast<double>(r.K()) -
                              adv.V() * adv.V().adjoint() / static_cast<double>(adv.N());
    kernel_ = adv.Pi().cwiseProduct(rho.transpose()).real();
    kernel_ = (kernel_ + kernel_.transpose()) / 2.0;
  }

  const RealMatrix& matrix() const { return kernel_; }
  Index M() const { return kernel_.rows(); }

  double signed_value(const BooleanFunction& f) const {
    detail::require(static_cast<Index>(f.size()) == M(), ErrorKind::kDimension, "oracle length does not match kernel");
    const RealVector x = f.as_vector();
    return x.dot(kernel_ * x);
  }

 private:
  RealMatrix kernel_;
};

struct AdvantageResult {
  double value = 0.0;
  BooleanFunction f;
};

inline constexpr Index kDefaultBruteForceCutoff = 24;

inline AdvantageResult max_advantage_bruteforce(const AdversarySpec& adv, const FunctionFamily& r,
                                                Index cutoff = kDefaultBruteForceCutoff) {
  detail::require(adv.M() <= cutoff, ErrorKind::kCapacity,
                  "brute force over 2^" + std::to_string(adv.M()) + " oracle functions exceeds the cutoff M <= " +
                      std::to_string(cutoff) + "; use max_advantage_localsearch for a lower bound");
  const AdvantageKernel kernel(adv, r);
  SignSearchResult best = max_abs_quadratic_exhaustive<double>(kernel.matrix());
  return {best.value, BooleanFunction(std::move(best.signs))};
}

inline AdvantageResult max_advantage_localsearch(const AdversarySpec& adv, const FunctionFamily& r,
                                                 std::size_t restarts, const RngStream& rng) {
  const AdvantageKernel kernel(adv, r);
  SignSearchResult best = max_abs_quadratic_local<double>(kernel.matrix(), restarts, rng);
  return {best.value, BooleanFunction(std::move(best.signs))};
}

// How the b = 1 challenger prepares its state. Both give the maximally mixed
// state on average, so per-round outcome distributions coincide.
enum class Challenger { kPhaseState, kBasisState };

// Precomputes per-state acceptance so that each round costs O(N) (phase-state
// challenger) or O(1) (basis-state challenger).
class GameSimulator {
 public:
  GameSimulator(const AdversarySpec& adv, const FunctionFamily& r, const BooleanFunction& f,
                Challenger challenger = Challenger::kPhaseState)
      : challenger_(challenger), n_(adv.N()) {
    detail::check_family(adv, r);
    detail::check_oracle(adv, f);
    const ComplexMatrix g = detail::acceptance_operator(adv, f);
    // Phase states are real, so only Re(G) enters psi^T G psi.
    accept_real_ = g.real();
    const RealMatrix states = r.phase_states();
    family_accept_.resize(r.K());
    for (std::size_t k = 0; k < r.K(); ++k) {
      const auto col = states.col(static_cast<Index>(k));
      family_accept_[k] = std::clamp(col.dot(accept_real_ * col), 0.0, 1.0);
    }
    basis_accept_.resize(static_cast<std::size_t>(n_));
    for (Index x = 0; x < n_; ++x) basis_accept_[static_cast<std::size_t>(x)] = std::clamp(g(x, x).real(), 0.0, 1.0);
  }

  GameOutcome play(RngStream& rng) const {
    GameOutcome out;
    out.challenge_bit = rng.bit() ? 1 : 0;
    double p = 0.0;
    if (out.challenge_bit == 0) {
      p = family_accept_[rng.below(family_accept_.size())];
    } else if (challenger_ == Challenger::kBasisState) {
      p = basis_accept_[rng.below(basis_accept_.size())];
    } else {
      RealVector h(n_);
      std::uint64_t bits = 0;
      for (Index x = 0; x < n_; ++x) {
        if (x % 64 == 0) bits = rng.next_u64();
        h(x) = (bits >> (x % 64)) & 1U ? -1.0 : 1.0;
      }
      p = std::clamp(h.dot(accept_real_ * h) / static_cast<double>(n_), 0.0, 1.0);
    }
    out.guess = rng.uniform() < p ? 0 : 1;
    return out;
  }

 private:
  Challenger challenger_;
  Index n_;
  RealMatrix accept_real_;
  std::vector<double> family_accept_;
  std::vector<double> basis_accept_;
};

struct GameTally {
  std::uint64_t trials = 0;
  std::uint64_t wins = 0;
  double win_rate() const { return trials == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(trials); }
};

// Round t uses the stream rng.derive(t), so the tally is schedule independent.
inline GameTally simulate_game_tally(const AdversarySpec& adv, const FunctionFamily& r, const BooleanFunction& f,
                                     std::uint64_t trials, const RngStream& rng,
                                     Challenger challenger = Challenger::kPhaseState) {
  detail::require(trials >= 1, ErrorKind::kInvalidInput, "simulate_game needs trials >= 1");
  const GameSimulator sim(adv, r, f, challenger);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(trials, 64));
  std::vector<std::uint64_t> wins(chunks, 0);
  parallel_for(chunks, [&](std::size_t c) {
    const ChunkRange range = chunk_range(trials, chunks, c);
    std::uint64_t local = 0;
    for (std::size_t t = range.begin; t < range.end; ++t) {
      RngStream round = rng.derive(t);
      if (sim.play(round).win()) ++local;
    }
    wins[c] = local;
  });
  GameTally tally{trials, 0};
  for (const auto w : wins) tally.wins += w;
  return tally;
}

inline double simulate_game(const AdversarySpec& adv, const FunctionFamily& r, const BooleanFunction& f,
                            std::uint64_t trials, const RngStream& rng, Challenger challenger = Challenger::kPhaseState) {
  return simulate_game_tally(adv, r, f, trials, rng, challenger).win_rate();
}

}  // namespace phaselab
