#include <gtest/gtest.h>

#include <numeric>

#include "phaselab/relaxations.hpp"
#include "test_util.hpp"

using namespace phaselab;
using phaselab::testing::hadamard;

namespace {

AdversarySpec random_adversary(Index n, Index m, Index rank, RngStream& rng) {
  return AdversarySpec(random_isometry(n, m, rng), random_projector(m, rank, rng));
}

BooleanFunction parity(int n, std::uint64_t r) {
  std::vector<std::int8_t> v(std::size_t{1} << n);
  for (std::size_t x = 0; x < v.size(); ++x) v[x] = __builtin_popcountll(x & r) & 1 ? -1 : 1;
  return BooleanFunction(v);
}

// Dense evaluation with every h enumerated.
double dense_spectral_relaxation(const AdversarySpec& adv, const FunctionFamily& r) {
  const auto w = isometry_weights(adv.V());
  auto dense_term = [&](const BooleanFunction& h) {
    const ComplexMatrix d = rescaling_matrix(adv.V(), w, h).dense();
    return ComplexMatrix(d.adjoint() * adv.Pi() * d);
  };
  ComplexMatrix family = ComplexMatrix::Zero(adv.M(), adv.M());
  for (std::size_t k = 0; k < r.K(); ++k) family += dense_term(r.row(k));
  family /= static_cast<double>(r.K());
  ComplexMatrix haar = ComplexMatrix::Zero(adv.M(), adv.M());
  const std::uint64_t count = std::uint64_t{1} << adv.N();
  for (std::uint64_t i = 0; i < count; ++i) {
    std::vector<std::int8_t> v(static_cast<std::size_t>(adv.N()));
    for (std::size_t x = 0; x < v.size(); ++x) v[x] = (i >> x) & 1U ? -1 : 1;
    haar += dense_term(BooleanFunction(v));
  }
  haar /= static_cast<double>(count);
  return Eigen::JacobiSVD<ComplexMatrix>(family - haar).singularValues()(0);
}

}  // namespace

TEST(spectral_relaxation, identity_adversary_is_zero) {
  RngStream rng(1);
  const AdversarySpec adv(ComplexMatrix::Identity(8, 8), ComplexMatrix::Identity(8, 8));
  EXPECT_NEAR(spectral_relaxation(adv, FunctionFamily::random(5, 8, rng)), 0.0, 1e-12);
}

TEST(spectral_relaxation, matches_dense_enumeration) {
  RngStream rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const AdversarySpec adv = random_adversary(4, 9, 4, rng);
    const auto r = FunctionFamily::random(3, 4, rng);
    EXPECT_NEAR(spectral_relaxation(adv, r), dense_spectral_relaxation(adv, r), 1e-10);
  }
}

TEST(spectral_relaxation, hadamard_repeated_parity) {
  // Every row equal to one parity: D = sqrt(N)|r><r|, so D^dag D = N|r><r| and
  // the relaxation is ||N|r><r| - I|| = N - 1.
  for (const int n : {2, 3, 4, 5}) {
    const Index dim = Index{1} << n;
    const AdversarySpec adv(hadamard(n), ComplexMatrix::Identity(dim, dim));
    const auto r = FunctionFamily::from_rows({parity(n, 1), parity(n, 1), parity(n, 1)});
    EXPECT_NEAR(spectral_relaxation(adv, r), static_cast<double>(dim - 1), 1e-9);
    if (n <= 4) {
      EXPECT_NEAR(dense_spectral_relaxation(adv, r), static_cast<double>(dim - 1), 1e-9);
    }
  }
}

TEST(spectral_relaxation, upper_bounds_exact_advantage) {
  RngStream rng(3);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + static_cast<Index>(rng.below(4));
    const Index m = n + static_cast<Index>(rng.below(static_cast<std::uint64_t>(13 - n)));
    const AdversarySpec adv = random_adversary(n, m, static_cast<Index>(rng.below(static_cast<std::uint64_t>(m + 1))), rng);
    const auto r = FunctionFamily::random(1 + rng.below(6), static_cast<std::size_t>(n), rng);
    EXPECT_LE(max_advantage_bruteforce(adv, r).value, spectral_relaxation(adv, r) + 1e-12);
  }
}

TEST(spectral_relaxation, decreases_as_family_grows) {
  RngStream rng(4);
  double previous = INFINITY;
  for (const std::size_t k : {8, 16, 32, 64}) {
    double total = 0;
    for (int draw = 0; draw < 50; ++draw) {
      RngStream s = rng.derive(draw);
      const AdversarySpec adv = random_adversary(8, 16, 8, s);
      total += spectral_relaxation(adv, FunctionFamily::random(k, 8, s));
    }
    EXPECT_LT(total / 50, previous) << "K = " << k;
    previous = total / 50;
  }
}

TEST(truncated_spectral_relaxation, inactive_truncation_matches_closed_form) {
  RngStream rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    const AdversarySpec adv = random_adversary(4, 8, 4, rng);
    const auto r = FunctionFamily::random(4, 4, rng);
    const auto t = truncated_spectral_relaxation(adv, r, TruncationConfig(2.0), rng.derive(trial));
    EXPECT_GT(t.standard_error, 0.0);
    EXPECT_NEAR(t.value, spectral_relaxation(adv, r), 4 * t.standard_error + 1e-9);
  }
}

TEST(truncated_spectral_relaxation, hadamard_worst_case_is_bounded) {
  const int n = 4;
  const double b = 2.0;
  const AdversarySpec adv(hadamard(n), ComplexMatrix::Identity(16, 16));
  const auto r = FunctionFamily::from_rows({parity(n, 6), parity(n, 6)});
  const auto t = truncated_spectral_relaxation(adv, r, TruncationConfig(b), RngStream(6));
  EXPECT_LE(t.value, 2 * b * b + 4 * t.standard_error);
  EXPECT_GT(spectral_relaxation(adv, r), 2 * b * b);
}

TEST(truncated_spectral_relaxation, vanishing_bound_collapses) {
  RngStream rng(7);
  const AdversarySpec adv = random_adversary(4, 8, 3, rng);
  const auto t = truncated_spectral_relaxation(adv, FunctionFamily::random(3, 4, rng), TruncationConfig(1e-6),
                                               RngStream(8), 500);
  EXPECT_LE(t.value, 1e-10);
}

TEST(truncated_spectral_relaxation, bounds_advantage_of_bounded_families) {
  RngStream rng(9);
  const double b = 3.0;
  int checked = 0;
  for (int trial = 0; trial < 20 && checked < 5; ++trial) {
    const AdversarySpec adv = random_adversary(4, 8, 4, rng);
    const auto r = FunctionFamily::random(3, 4, rng);
    if (!is_b_bounded(adv.V(), r, TruncationConfig(b))) continue;
    ++checked;
    const auto t = truncated_spectral_relaxation(adv, r, TruncationConfig(b), rng.derive(trial), 4000);
    const double slack = 4.0 * static_cast<double>(adv.M()) * std::exp(-b * b / 2);
    EXPECT_LE(max_advantage_bruteforce(adv, r).value, t.value + slack + 4 * t.standard_error);
  }
  EXPECT_GT(checked, 0);
}

TEST(truncated_spectral_relaxation, deterministic) {
  RngStream rng(10);
  const AdversarySpec adv = random_adversary(3, 6, 2, rng);
  const auto r = FunctionFamily::random(2, 3, rng);
  set_thread_count(1);
  const auto a = truncated_spectral_relaxation(adv, r, TruncationConfig(1.0), RngStream(3), 1000);
  set_thread_count(8);
  const auto b = truncated_spectral_relaxation(adv, r, TruncationConfig(1.0), RngStream(3), 1000);
  set_thread_count(0);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.standard_error, b.standard_error);
}

TEST(decoupled_spectral_relaxation, examples) {
  RngStream rng(11);
  const auto r = FunctionFamily::random(4, 6, rng);
  const auto rp = FunctionFamily::random(4, 6, rng);
  const ComplexMatrix v = random_isometry(6, 9, rng);
  EXPECT_EQ(decoupled_spectral_relaxation(AdversarySpec(v, ComplexMatrix::Zero(9, 9)), r, rp), 0.0);
  const AdversarySpec id(ComplexMatrix::Identity(6, 6), ComplexMatrix::Identity(6, 6));
  EXPECT_NEAR(decoupled_spectral_relaxation(id, r, r), 1.0, 1e-12);
  EXPECT_THROW(decoupled_spectral_relaxation(id, r, FunctionFamily::random(3, 6, rng)), Error);
}

TEST(decoupled_spectral_relaxation, bounds_every_decoupled_advantage) {
  RngStream rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const AdversarySpec adv = random_adversary(4, 10, 5, rng);
    const auto r = FunctionFamily::random(4, 4, rng);
    const auto rp = FunctionFamily::random(4, 4, rng);
    const double bound = decoupled_spectral_relaxation(adv, r, rp);
    for (int j = 0; j < 100; ++j)
      EXPECT_LE(decoupled_advantage(adv, r, rp, BooleanFunction::random(10, rng)), bound + 1e-12);
    EXPECT_LE(max_decoupled_advantage_bruteforce(adv, r, rp).value, bound + 1e-12);
  }
}

TEST(max_decoupled_advantage_bruteforce, matches_direct_evaluation) {
  RngStream rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const AdversarySpec adv = random_adversary(3, 7, 3, rng);
    const auto r = FunctionFamily::random(3, 3, rng);
    const auto rp = FunctionFamily::random(3, 3, rng);
    const auto best = max_decoupled_advantage_bruteforce(adv, r, rp);
    EXPECT_NEAR(decoupled_advantage(adv, r, rp, best.f), best.value, 1e-12);
    double direct = 0;
    for (std::uint64_t i = 0; i < 128; ++i) {
      std::vector<std::int8_t> f(7);
      for (std::size_t x = 0; x < 7; ++x) f[x] = (i >> x) & 1U ? -1 : 1;
      direct = std::max(direct, decoupled_advantage(adv, r, rp, BooleanFunction(f)));
    }
    EXPECT_NEAR(best.value, direct, 1e-12);
  }
}

TEST(decoupling, mean_advantage_within_four_times_decoupled) {
  RngStream rng(14);
  const int instances = 60;
  std::vector<double> coupled, decoupled;
  for (int i = 0; i < instances; ++i) {
    RngStream s = rng.derive(i);
    const AdversarySpec adv = random_adversary(4, 8, 4, s);
    const auto r = FunctionFamily::random(3, 4, s);
    const auto rp = FunctionFamily::random(3, 4, s);
    coupled.push_back(max_advantage_bruteforce(adv, r).value);
    decoupled.push_back(max_decoupled_advantage_bruteforce(adv, r, rp).value);
  }
  auto mean = [](const std::vector<double>& x) { return std::accumulate(x.begin(), x.end(), 0.0) / x.size(); };
  auto sem = [&](const std::vector<double>& x) {
    const double m = mean(x);
    double ss = 0;
    for (const double v : x) ss += (v - m) * (v - m);
    return std::sqrt(ss / (x.size() - 1) / x.size());
  };
  EXPECT_LE(mean(coupled), 4 * mean(decoupled) + 3 * std::hypot(sem(coupled), 4 * sem(decoupled)));
}

TEST(subset_norm_conjecture, basis_measurement_single_state) {
  // N = 2, ambient 8: outcome (a, b) contributes +-|b><b|/2 depending on a.
  std::vector<ComplexMatrix> projectors;
  for (Index i = 0; i < 8; ++i) {
    ComplexMatrix p = ComplexMatrix::Zero(8, 8);
    p(i, i) = 1.0;
    projectors.push_back(p);
  }
  const std::vector<UnitVector> states{UnitVector::basis(2, 0)};
  const auto brute = subset_norm_conjecture(projectors, states, SubsetSearch::kBrute);
  EXPECT_NEAR(brute.value, 0.5, 1e-14);
  EXPECT_EQ(brute.subset, std::vector<std::size_t>{0});
  const auto greedy = subset_norm_conjecture(projectors, states, SubsetSearch::kGreedy);
  EXPECT_NEAR(greedy.value, 0.5, 1e-14);
}

TEST(subset_norm_conjecture, empty_and_full_subsets_contribute_nothing) {
  RngStream rng(15);
  const auto projectors = random_measurement(8, 5, rng);
  const std::vector<UnitVector> states{random_unit_vector(2, rng), random_unit_vector(2, rng)};
  const auto contrib = detail::subset_contributions(projectors, states);
  ComplexMatrix total = ComplexMatrix::Zero(4, 4);
  for (const auto& a : contrib) total += a;
  EXPECT_LE(max_abs(total), 1e-12);
}

TEST(subset_norm_conjecture, greedy_never_beats_brute) {
  RngStream rng(16);
  for (int trial = 0; trial < 10; ++trial) {
    const auto projectors = random_measurement(12, 12, rng);
    std::vector<UnitVector> states;
    for (int k = 0; k < 3; ++k) states.push_back(random_unit_vector(3, rng));
    const auto brute = subset_norm_conjecture(projectors, states, SubsetSearch::kBrute);
    SubsetSearchOptions opts;
    opts.seed = static_cast<std::uint64_t>(trial);
    const auto greedy = subset_norm_conjecture(projectors, states, SubsetSearch::kGreedy, opts);
    EXPECT_LE(greedy.value, brute.value + 1e-12);
    EXPECT_GT(greedy.value, 0.0);
  }
}

TEST(subset_norm_conjecture, input_errors) {
  RngStream rng(17);
  const std::vector<UnitVector> states{random_unit_vector(3, rng)};
  try {
    subset_norm_conjecture(random_measurement(8, 4, rng), states, SubsetSearch::kBrute);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
  auto incomplete = random_measurement(6, 3, rng);
  incomplete.pop_back();
  EXPECT_THROW(subset_norm_conjecture(incomplete, states, SubsetSearch::kBrute), Error);
  try {
    subset_norm_conjecture(random_measurement(21, 21, rng), states, SubsetSearch::kBrute);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCapacity);
  }
}
