#pragma once

// Maximization of |f^T S f| over sign vectors f in {+1,-1}^M, for a symmetric
// (real or complex) matrix S. Shared by the exact advantage search and its
// decoupled variant.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "phaselab/error.hpp"
#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"

namespace phaselab {

struct SignSearchResult {
  double value = 0.0;
  std::vector<std::int8_t> signs;
};

namespace detail {

template <class Scalar>
using SquareMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <class Scalar>
Scalar quadratic_value(const SquareMatrix<Scalar>& s, const std::vector<std::int8_t>& f) {
  Scalar total{0};
  for (Index i = 0; i < s.rows(); ++i) {
    Scalar row{0};
    for (Index j = 0; j < s.cols(); ++j) row += s(i, j) * static_cast<double>(f[j]);
    total += static_cast<double>(f[i]) * row;
  }
  return total;
}

// Incremental state: field = S f, value = f^T S f.
template <class Scalar>
struct FlipState {
  const SquareMatrix<Scalar>& s;
  std::vector<std::int8_t> f;
  std::vector<Scalar> field;
  Scalar value{0};

  FlipState(const SquareMatrix<Scalar>& kernel, std::vector<std::int8_t> signs)
      : s(kernel), f(std::move(signs)), field(f.size(), Scalar{0}) {
    const Index m = s.rows();
    for (Index i = 0; i < m; ++i) {
      Scalar acc{0};
      for (Index j = 0; j < m; ++j) acc += s(i, j) * static_cast<double>(f[j]);
      field[i] = acc;
      value += static_cast<double>(f[i]) * acc;
    }
  }

  Scalar value_after_flip(Index p) const {
    const double fp = f[p];
    return value - 4.0 * fp * (field[p] - s(p, p) * fp);
  }

  void flip(Index p) {
    const double fp = f[p];
    value = value_after_flip(p);
    for (Index j = 0; j < s.rows(); ++j) field[j] -= 2.0 * fp * s(j, p);
    f[p] = static_cast<std::int8_t>(-f[p]);
  }
};

// Position p >= 1 of the sign vector maps to mask bit (M-1-p), so numeric mask
// order is lexicographic order of f with +1 before -1.
inline std::vector<std::int8_t> signs_from_mask(Index m, std::uint64_t mask) {
  std::vector<std::int8_t> f(m, 1);
  for (Index p = 1; p < m; ++p)
    if ((mask >> (m - 1 - p)) & 1U) f[p] = -1;
  return f;
}

inline constexpr double kTieTol = 1e-12;

}  // namespace detail

// Exhaustive search with f(0) fixed to +1 (the objective is even in f). Returns
// the lexicographically first maximizer up to a 1e-12 tie tolerance, with its
// value recomputed directly.
template <class Scalar>
SignSearchResult max_abs_quadratic_exhaustive(const detail::SquareMatrix<Scalar>& s) {
  const Index m = s.rows();
  detail::require(m >= 1 && m <= 62, ErrorKind::kCapacity, "sign search needs 1 <= M <= 62");
  const std::uint64_t total = std::uint64_t{1} << (m - 1);
  const std::size_t chunks = static_cast<std::size_t>(std::min<std::uint64_t>(total, 256));

  struct Best {
    double value = -1.0;
    std::uint64_t mask = 0;
  };
  std::vector<Best> best(chunks);
  parallel_for(chunks, [&](std::size_t c) {
    const ChunkRange range = chunk_range(total, chunks, c);
    std::uint64_t gray = range.begin ^ (range.begin >> 1);
    detail::FlipState<Scalar> state(s, detail::signs_from_mask(m, gray));
    Best local;
    for (std::uint64_t i = range.begin; i < range.end; ++i) {
      const double v = std::abs(state.value);
      if (v > local.value + detail::kTieTol || (std::abs(v - local.value) <= detail::kTieTol && gray < local.mask)) {
        local = {v, gray};
      }
      if (i + 1 < range.end) {
        const int bit = std::countr_zero(i + 1);
        gray ^= std::uint64_t{1} << bit;
        state.flip(m - 1 - bit);
      }
    }
    best[c] = local;
  });

  Best overall = best.front();
  for (const Best& b : best) {
    if (b.value > overall.value + detail::kTieTol ||
        (std::abs(b.value - overall.value) <= detail::kTieTol && b.mask < overall.mask)) {
      overall = b;
    }
  }
  SignSearchResult out;
  out.signs = detail::signs_from_mask(m, overall.mask);
  out.value = std::abs(detail::quadratic_value(s, out.signs));
  return out;
}

// Steepest-ascent single-flip hill climbing from `restarts` random starts.
template <class Scalar>
SignSearchResult max_abs_quadratic_local(const detail::SquareMatrix<Scalar>& s, std::size_t restarts,
                                         const RngStream& rng) {
  detail::require(restarts >= 1, ErrorKind::kInvalidInput, "local search needs restarts >= 1");
  const Index m = s.rows();
  std::vector<SignSearchResult> results(restarts);
  parallel_for(restarts, [&](std::size_t r) {
    RngStream stream = rng.derive(r);
    std::vector<std::int8_t> f(m);
    for (auto& x : f) x = static_cast<std::int8_t>(stream.sign());
    detail::FlipState<Scalar> state(s, std::move(f));
    for (;;) {
      const double current = std::abs(state.value);
      Index best_p = -1;
      double best_v = current;
      for (Index p = 0; p < m; ++p) {
        const double v = std::abs(state.value_after_flip(p));
        if (v > best_v + 1e-15) {
          best_v = v;
          best_p = p;
        }
      }
      if (best_p < 0) break;
      state.flip(best_p);
    }
    if (state.f[0] < 0)
      for (auto& x : state.f) x = static_cast<std::int8_t>(-x);
    results[r].value = std::abs(detail::quadratic_value(s, state.f));
    results[r].signs = std::move(state.f);
  });
  std::size_t winner = 0;
  for (std::size_t r = 1; r < restarts; ++r)
    if (results[r].value > results[winner].value + detail::kTieTol) winner = r;
  return std::move(results[winner]);
}

}  // namespace phaselab
