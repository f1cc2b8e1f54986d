#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "phaselab/numerics.hpp"
#include "phaselab/parallel.hpp"
#include "test_util.hpp"

using namespace phaselab;
using phaselab::testing::random_hermitian;
using phaselab::testing::random_matrix;

TEST(rng, reproducible_and_stream_separated) {
  RngStream a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  RngStream a2(42, 7);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a2.next_u64() == c.next_u64();
  EXPECT_EQ(same, 0);
}

TEST(rng, derive_is_pure) {
  RngStream root(3);
  const auto first = root.derive(5).next_u64();
  root.next_u64();
  EXPECT_EQ(root.derive(5).next_u64(), first);
  EXPECT_NE(root.derive(6).next_u64(), first);
}

TEST(rng, below_and_uniform_ranges) {
  RngStream rng(1);
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    const auto v = rng.below(7);
    ASSERT_LT(v, 7u);
    seen.insert(v);
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
  EXPECT_EQ(seen.size(), 7u);
}

TEST(rng, normal_moments) {
  RngStream rng(9);
  double s = 0, s2 = 0, c2 = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    s += x;
    s2 += x * x;
    c2 += std::norm(rng.complex_normal());
  }
  EXPECT_NEAR(s / n, 0.0, 0.01);
  EXPECT_NEAR(s2 / n, 1.0, 0.01);
  EXPECT_NEAR(c2 / n, 1.0, 0.01);
}

TEST(parallel, results_independent_of_thread_count) {
  auto run = [] {
    std::vector<std::uint64_t> out(100);
    const RngStream root(11);
    parallel_for(out.size(), [&](std::size_t i) {
      RngStream s = root.derive(i);
      out[i] = s.next_u64() ^ s.next_u64();
    });
    return out;
  };
  set_thread_count(1);
  const auto serial = run();
  set_thread_count(8);
  const auto threaded = run();
  set_thread_count(0);
  EXPECT_EQ(serial, threaded);
}

TEST(parallel, rethrows_lowest_index_error) {
  set_thread_count(4);
  try {
    parallel_for(50, [](std::size_t i) {
      if (i == 17 || i == 40) throw Error(ErrorKind::kNumerical, std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("17"), std::string::npos);
  }
  set_thread_count(0);
}

TEST(parallel, chunk_ranges_cover) {
  std::size_t next = 0;
  for (std::size_t c = 0; c < 7; ++c) {
    const auto r = chunk_range(100, 7, c);
    EXPECT_EQ(r.begin, next);
    next = r.end;
  }
  EXPECT_EQ(next, 100u);
}

TEST(operator_norm, identity) { EXPECT_DOUBLE_EQ(operator_norm(ComplexMatrix::Identity(4, 4)), 1.0); }

TEST(operator_norm, diagonal) {
  ComplexMatrix d = ComplexMatrix::Zero(2, 2);
  d(0, 0) = 3.0;
  d(1, 1) = -5.0;
  EXPECT_NEAR(operator_norm(d), 5.0, 1e-14);
}

TEST(operator_norm, hermitian_matches_eigendecomposition) {
  RngStream rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const ComplexMatrix h = random_hermitian(8, rng);
    Eigen::ComplexEigenSolver<ComplexMatrix> es(h);
    double expected = 0;
    for (Index i = 0; i < 8; ++i) expected = std::max(expected, std::abs(es.eigenvalues()(i)));
    EXPECT_NEAR(operator_norm(h), expected, 1e-8);
  }
}

TEST(operator_norm, general_matches_svd) {
  RngStream rng(22);
  for (const auto& [r, c] : std::vector<std::pair<Index, Index>>{{5, 9}, {9, 5}, {1, 6}, {7, 7}}) {
    const ComplexMatrix a = random_matrix(r, c, rng);
    const double svd = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues()(0);
    EXPECT_NEAR(operator_norm(a), svd, 1e-9 * svd);
    EXPECT_NEAR(operator_norm_power(a), svd, 1e-8 * svd);
  }
}

TEST(operator_norm, power_iteration_on_hermitian_and_rank_one) {
  RngStream rng(23);
  const ComplexMatrix h = random_hermitian(12, rng);
  EXPECT_NEAR(operator_norm_power(h), operator_norm(h, {.method = NormMethod::kDense}), 1e-7);
  const ComplexVector u = random_matrix(6, 1, rng).col(0);
  const ComplexVector v = random_matrix(4, 1, rng).col(0);
  const ComplexMatrix rank_one = u * v.adjoint();
  EXPECT_NEAR(operator_norm_power(rank_one), u.norm() * v.norm(), 1e-10);
  EXPECT_EQ(operator_norm_power(ComplexMatrix::Zero(3, 3)), 0.0);
}

TEST(operator_norm, forced_power_path_above_dense_limit) {
  RngStream rng(24);
  const ComplexMatrix a = random_matrix(40, 30, rng);
  NormOptions opts;
  opts.dense_limit = 8;
  const double svd = Eigen::JacobiSVD<ComplexMatrix>(a).singularValues()(0);
  EXPECT_NEAR(operator_norm(a, opts), svd, 1e-7 * svd);
}

TEST(operator_norm, rejects_bad_input) {
  ComplexMatrix m = ComplexMatrix::Identity(2, 2);
  m(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(operator_norm(m), Error);
  EXPECT_THROW(operator_norm(ComplexMatrix(0, 3)), Error);
}

TEST(operator_norm, unitary_invariance) {
  RngStream rng(25);
  for (int trial = 0; trial < 10; ++trial) {
    const ComplexMatrix a = random_matrix(8, 8, rng);
    const ComplexMatrix u = random_isometry(8, 8, rng);
    const ComplexMatrix w = random_isometry(8, 8, rng);
    EXPECT_NEAR(operator_norm(u * a * w), operator_norm(a), 1e-8);
  }
}

TEST(operator_norm, sampled_quadratic_form_is_a_lower_bound) {
  RngStream rng(26);
  const ComplexMatrix h = random_hermitian(6, rng);
  const double norm = operator_norm(h);
  double sampled = 0;
  for (int i = 0; i < 10000; ++i) {
    const ComplexVector v = random_unit_vector(6, rng).amplitudes();
    sampled = std::max(sampled, std::abs(v.dot(h * v)));
  }
  EXPECT_LE(sampled, norm + 1e-8);
  EXPECT_GT(sampled, 0.5 * norm);
}

TEST(random_isometry, one_by_one_is_a_phase) {
  RngStream rng(31);
  const ComplexMatrix v = random_isometry(1, 1, rng);
  EXPECT_NEAR(std::abs(v(0, 0)), 1.0, 1e-14);
}

TEST(random_isometry, isometry_property) {
  RngStream rng(32);
  const ComplexMatrix v = random_isometry(4, 16, rng);
  EXPECT_EQ(v.rows(), 16);
  EXPECT_LE(isometry_residual(v), 1e-10);
}

TEST(random_isometry, same_seed_same_matrix) {
  RngStream a(33), b(33);
  EXPECT_EQ(random_isometry(2, 4, a), random_isometry(2, 4, b));
}

TEST(random_isometry, rejects_wide) {
  RngStream rng(34);
  try {
    random_isometry(5, 4, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDimension);
  }
}

TEST(random_projector, edge_ranks) {
  RngStream rng(41);
  EXPECT_EQ(random_projector(4, 0, rng), ComplexMatrix::Zero(4, 4));
  EXPECT_EQ(random_projector(4, 4, rng), ComplexMatrix::Identity(4, 4));
}

TEST(random_projector, trace_is_rank) {
  RngStream rng(42);
  const ComplexMatrix p = random_projector(8, 3, rng);
  EXPECT_NEAR(p.trace().real(), 3.0, 1e-8);
  EXPECT_LE(projector_residual(p), 1e-10);
}

TEST(random_projector, rejects_rank_above_dim) {
  RngStream rng(43);
  EXPECT_THROW(random_projector(3, 4, rng), Error);
}

TEST(tv_distance, basic_cases) {
  const std::vector<double> p{0.25, 0.25, 0.5};
  EXPECT_EQ(tv_distance(p, p), 0.0);
  std::vector<double> point(8, 0.0), uniform(8, 1.0 / 8);
  point[0] = 1.0;
  EXPECT_NEAR(tv_distance(point, uniform), 1.0 - 1.0 / 8, 1e-15);
  const std::vector<double> a{0.5, 0.5, 0, 0}, b{0, 0, 0.3, 0.7};
  EXPECT_DOUBLE_EQ(tv_distance(a, b), 1.0);
}

TEST(tv_distance, rejects_bad_input) {
  const std::vector<double> a{0.5, 0.5}, b{1.0}, c{0.6, 0.6}, d{1.5, -0.5};
  EXPECT_THROW(tv_distance(a, b), Error);
  EXPECT_THROW(tv_distance(a, c), Error);
  EXPECT_THROW(tv_distance(a, d), Error);
}

TEST(tv_distance, symmetric_and_triangle) {
  RngStream rng(44);
  auto draw = [&] {
    std::vector<double> p(10);
    double s = 0;
    for (auto& x : p) s += (x = rng.uniform());
    for (auto& x : p) x /= s;
    return p;
  };
  for (int i = 0; i < 200; ++i) {
    const auto p = draw(), q = draw(), r = draw();
    EXPECT_DOUBLE_EQ(tv_distance(p, q), tv_distance(q, p));
    EXPECT_LE(tv_distance(p, r), tv_distance(p, q) + tv_distance(q, r) + 1e-15);
  }
}

TEST(unit_vector, validates_norm) {
  ComplexVector v(2);
  v << 1.0, 1.0;
  EXPECT_THROW(UnitVector{v}, Error);
  EXPECT_NEAR(UnitVector::normalized(v).amplitudes().norm(), 1.0, 1e-15);
}
