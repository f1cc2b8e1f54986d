#include <gtest/gtest.h>

#include "phaselab/decomposition.hpp"
#include "test_util.hpp"

using namespace phaselab;
using phaselab::testing::binomial_sigma;
using phaselab::testing::hadamard;

namespace {

BooleanFunction parity(int n, std::uint64_t r) {
  std::vector<std::int8_t> v(std::size_t{1} << n);
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = __builtin_popcountll(x & r) & 1 ? -1 : 1;
  return BooleanFunction(v);
}

}  // namespace

TEST(isometry_weights, identity_and_hadamard_are_uniform) {
  for (const auto& v : {ComplexMatrix(ComplexMatrix::Identity(8, 8)), hadamard(3)}) {
    const auto w = isometry_weights(v);
    for (Index i = 0; i < 8; ++i) EXPECT_NEAR(w[i], 1.0 / 8, 1e-15);
  }
}

TEST(isometry_weights, random_sum_to_one_and_match_rows) {
  RngStream rng(1);
  const ComplexMatrix v = random_isometry(4, 32, rng);
  const auto w = isometry_weights(v);
  EXPECT_NEAR(w.values().sum(), 1.0, 1e-9);
  for (Index i = 0; i < 32; ++i) EXPECT_NEAR(w[i], v.row(i).squaredNorm() / 4, 1e-10);
}

TEST(isometry_weights, rejects_non_isometry) {
  try {
    isometry_weights(2.0 * ComplexMatrix::Identity(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kInvalidInput);
  }
}

TEST(weight_vector, examples) {
  const auto u = weight_vector(IsometryWeights(RealVector::Constant(4, 0.25)));
  for (Index i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(u[i].real(), 0.5);
  RealVector point(3);
  point << 1, 0, 0;
  const auto e = weight_vector(IsometryWeights(point));
  EXPECT_EQ(e[0], Complex(1.0));
  EXPECT_EQ(e[1], Complex(0.0));
  RngStream rng(2);
  EXPECT_NEAR(weight_vector(isometry_weights(random_isometry(5, 17, rng))).amplitudes().norm(), 1.0, 1e-10);
}

TEST(rescaling_matrix, identity_gives_function_values) {
  RngStream rng(3);
  const auto h = BooleanFunction::random(8, rng);
  const auto d = rescaling_matrix(ComplexMatrix::Identity(8, 8), h);
  for (Index i = 0; i < 8; ++i) EXPECT_NEAR(std::abs(d[i] - Complex(h[static_cast<std::size_t>(i)])), 0.0, 1e-14);
}

TEST(rescaling_matrix, hadamard_parity_is_a_single_spike) {
  const int n = 4;
  const std::uint64_t r = 0b1011;
  const auto d = rescaling_matrix(hadamard(n), parity(n, r));
  for (Index i = 0; i < 16; ++i) EXPECT_NEAR(std::abs(d[i]), i == static_cast<Index>(r) ? 4.0 : 0.0, 1e-12);
}

TEST(rescaling_matrix, reconstruction_identity) {
  RngStream rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix v = random_isometry(16, 64, rng);
    const auto h = BooleanFunction::random(16, rng);
    const auto w = isometry_weights(v);
    const auto d = rescaling_matrix(v, w, h);
    const ComplexVector err = v * phase_state(h).amplitudes() - d.apply(weight_vector(w).amplitudes());
    EXPECT_LE(err.norm(), 1e-10);
  }
}

TEST(rescaling_matrix, zero_rows_are_masked) {
  RngStream rng(5);
  ComplexMatrix v = ComplexMatrix::Zero(6, 3);
  const ComplexMatrix inner = random_isometry(3, 4, rng);
  v.topRows(2) = inner.topRows(2);
  v.bottomRows(2) = inner.bottomRows(2);
  const auto w = isometry_weights(v);
  const auto h = BooleanFunction::random(3, rng);
  const auto d = rescaling_matrix(v, w, h);
  EXPECT_TRUE(d.masked(2));
  EXPECT_TRUE(d.masked(3));
  EXPECT_FALSE(d.masked(0));
  EXPECT_EQ(d[2], Complex(0.0));
  const ComplexVector err = v * phase_state(h).amplitudes() - d.apply(weight_vector(w).amplitudes());
  EXPECT_LE(err.norm(), 1e-10);
  const auto r = FunctionFamily::random(4, 3, rng);
  EXPECT_GT(width(v, r), 0.0);
}

TEST(truncation, entry_examples) {
  EXPECT_EQ(truncate_entry(3.0, 2.0), Complex(2.0));
  EXPECT_EQ(truncate_entry(Complex(1, 1), 2.0), Complex(1, 1));
  EXPECT_NEAR(std::abs(truncate_entry(Complex(-3, 4), 2.0) - Complex(-1.2, 1.6)), 0.0, 1e-15);
  EXPECT_THROW(TruncationConfig(0.0), Error);
}

TEST(truncation, bounded_input_unchanged_and_composition) {
  RngStream rng(6);
  const ComplexMatrix v = random_isometry(8, 24, rng);
  const auto d = rescaling_matrix(v, BooleanFunction::random(8, rng));
  const double big = d.diagonal().cwiseAbs().maxCoeff() + 1.0;
  EXPECT_EQ(truncate_rescaling(d, TruncationConfig(big)).diagonal(), d.diagonal());
  for (const double b : {0.3, 0.8, 1.5}) {
    const auto once = truncate_rescaling(d, TruncationConfig(b));
    EXPECT_LE(once.diagonal().cwiseAbs().maxCoeff(), b + 1e-15);
    const auto twice = truncate_rescaling(once, TruncationConfig(b + 0.7));
    EXPECT_EQ(twice.diagonal(), once.diagonal());
  }
}

TEST(width, identity_is_exactly_one) {
  RngStream rng(7);
  for (int trial = 0; trial < 5; ++trial)
    EXPECT_EQ(width(ComplexMatrix::Identity(16, 16), FunctionFamily::random(1 + rng.below(9), 16, rng)), 1.0);
}

TEST(width, hadamard_parity_single_row) {
  const auto r = FunctionFamily::from_rows({parity(5, 7)});
  EXPECT_NEAR(width(hadamard(5), r), 32.0, 1e-10);
}

TEST(width, random_isometry_mean_is_order_one) {
  RngStream rng(8);
  double total = 0;
  const int draws = 200;
  for (int i = 0; i < draws; ++i) {
    RngStream s = rng.derive(i);
    const ComplexMatrix v = random_isometry(32, 128, s);
    total += width(v, FunctionFamily::random(64, 32, s));
  }
  EXPECT_LE(total / draws, 3.0);
}

TEST(is_b_bounded, examples) {
  RngStream rng(9);
  const auto r = FunctionFamily::random(5, 16, rng);
  EXPECT_TRUE(is_b_bounded(ComplexMatrix::Identity(16, 16), r, TruncationConfig(1.0)));
  EXPECT_FALSE(is_b_bounded(hadamard(4), FunctionFamily::from_rows({parity(4, 3)}), TruncationConfig(2.0)));
  EXPECT_TRUE(is_b_bounded(hadamard(4), FunctionFamily::from_rows({parity(4, 3)}), TruncationConfig(4.0)));
  for (int trial = 0; trial < 10; ++trial)
    EXPECT_TRUE(is_b_bounded(random_isometry(16, 40, rng), r, TruncationConfig(4.0)));
}

TEST(rescaling_matrix, typical_squared_magnitude_is_one) {
  RngStream rng(10);
  const ComplexMatrix v = random_isometry(8, 20, rng);
  const auto w = isometry_weights(v);
  const int samples = 10000;
  const ComplexMatrix d = rescaling_columns(v, w, FunctionFamily::random(samples, 8, rng));
  for (Index i = 0; i < 20; ++i) EXPECT_NEAR(d.row(i).squaredNorm() / samples, 1.0, 0.1) << "row " << i;
  const ComplexMatrix avg = (d * d.adjoint()).cwiseProduct(ComplexMatrix::Identity(20, 20)) / samples;
  EXPECT_LE(max_abs(avg - ComplexMatrix::Identity(20, 20)), 0.1);
}

TEST(rescaling_matrix, squared_magnitudes_have_exponential_tails) {
  RngStream rng(11);
  const int samples = 4000;
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix v = random_isometry(16, 48, rng);
    const ComplexMatrix d = rescaling_columns(v, isometry_weights(v), FunctionFamily::random(samples, 16, rng));
    const Index i = static_cast<Index>(rng.below(48));
    for (const double t : {2.0, 4.0, 8.0}) {
      int hits = 0;
      for (Index k = 0; k < samples; ++k) hits += std::norm(d(i, k)) - 1.0 >= t;
      const double bound = 2 * std::exp(-t / 4);
      EXPECT_LE(static_cast<double>(hits) / samples, bound + 3 * binomial_sigma(std::min(bound, 1.0), samples));
    }
  }
}
