#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "amm/error.hpp"
#include "amm/solver.hpp"
#include "oracles.hpp"

namespace amm {
namespace {

using testing::from_rows;
using testing::random_signs;

AttributeMatrix column_vector(const std::vector<int>& v) {
  std::vector<std::vector<int>> rows;
  for (int x : v) rows.push_back({x});
  return from_rows(rows);
}

AttributeMatrix permute_columns(const AttributeMatrix& m, std::uint64_t seed) {
  std::vector<std::size_t> order(m.n_attrs());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 gen(seed);
  std::shuffle(order.begin(), order.end(), gen);
  return m.select_columns(order);
}

AttributeMatrix permute_rows(const AttributeMatrix& m, const std::vector<Eigen::Index>& order) {
  SignMatrix out(m.entries().rows(), m.entries().cols());
  for (Eigen::Index i = 0; i < out.rows(); ++i) out.row(i) = m.entries().row(order[static_cast<std::size_t>(i)]);
  return AttributeMatrix(std::move(out));
}

// N = 4, S = {h1, h2}, D = {z1, z2} from the pairing example.
AttributeMatrix example_s() { return from_rows({{1, 1}, {1, 1}, {1, -1}, {1, -1}}); }
AttributeMatrix example_d() { return from_rows({{1, -1}, {1, 1}, {1, 1}, {1, 1}}); }

TEST(Correlation, AgreementFraction) {
  const std::vector<std::int8_t> z{1, 1, -1, -1};
  const std::vector<std::int8_t> h{1, -1, -1, -1};
  EXPECT_DOUBLE_EQ(correlation(z, h), 0.75);
  EXPECT_DOUBLE_EQ(correlation(z, z), 1.0);
  const std::vector<std::int8_t> neg{-1, -1, 1, 1};
  EXPECT_DOUBLE_EQ(correlation(z, neg), 0.0);
}

TEST(Correlation, LengthMismatch) {
  const std::vector<std::int8_t> a{1, 1};
  const std::vector<std::int8_t> b{1, 1, 1};
  EXPECT_THROW(correlation(a, b), Error);
}

TEST(GreedyPair, WorkedExample) {
  const PairSet p = greedy_pair(example_s(), example_d());
  ASSERT_EQ(p.pairs.size(), 2u);
  EXPECT_EQ(p.pairs[0], (MatchedPair{0, 0, 1.0, 4}));
  EXPECT_EQ(p.pairs[1], (MatchedPair{1, 1, 0.25, 1}));

  const auto trace = testing::simulate_greedy(example_s(), example_d());
  ASSERT_EQ(trace.pairs.size(), 2u);
  EXPECT_EQ(trace.pairs[1].j, 1u);
  EXPECT_DOUBLE_EQ(trace.pairs[1].rho, 0.25);

  Eigen::MatrixXi expected(2, 2);
  expected << 1, 0, 0, 1;
  EXPECT_EQ(p.r_star, expected);
}

TEST(GreedyPair, IdentityMatching) {
  const AttributeMatrix s = from_rows({{1, 1, -1}, {1, -1, 1}, {-1, 1, 1}, {1, 1, 1}});
  const PairSet p = greedy_pair(s, s);
  ASSERT_EQ(p.pairs.size(), 3u);
  for (const MatchedPair& m : p.pairs) {
    EXPECT_EQ(m.meaningful, m.discovered);
    EXPECT_DOUBLE_EQ(m.correlation, 1.0);
  }
}

TEST(GreedyPair, LexicographicTies) {
  // Every column is the same vector, so all correlations are equal.
  const AttributeMatrix s = from_rows({{1, 1, 1}, {-1, -1, -1}});
  const AttributeMatrix d = from_rows({{1, 1, 1, 1}, {-1, -1, -1, -1}});
  const PairSet p = greedy_pair(s, d);
  ASSERT_EQ(p.pairs.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(p.pairs[i].meaningful, i);
    EXPECT_EQ(p.pairs[i].discovered, i);
  }
}

TEST(GreedyPair, InvariantsAndOracleAgreement) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    const std::size_t j = 1 + seed % 6;
    const std::size_t k = 1 + (seed / 6) % 6;
    const AttributeMatrix s = random_signs(16, j, seed);
    const AttributeMatrix d = random_signs(16, k, seed + 1000);
    const PairSet p = greedy_pair(s, d);
    ASSERT_EQ(p.pairs.size(), std::min(j, k));
    EXPECT_LE(p.r_star.rowwise().sum().maxCoeff(), 1);
    EXPECT_LE(p.r_star.colwise().sum().maxCoeff(), 1);
    EXPECT_EQ(p.r_star.sum(), static_cast<int>(p.pairs.size()));

    const auto trace = testing::simulate_greedy(s, d);
    for (std::size_t i = 0; i < p.pairs.size(); ++i) {
      EXPECT_EQ(p.pairs[i].meaningful, trace.pairs[i].j);
      EXPECT_EQ(p.pairs[i].discovered, trace.pairs[i].k);
      EXPECT_DOUBLE_EQ(p.pairs[i].correlation, trace.pairs[i].rho);
    }
  }
}

TEST(DistJp, WorkedExample) {
  const DistanceValue v = dist_jp(example_s(), example_d());
  EXPECT_DOUBLE_EQ(v.value, 6.0);
  const double frob = testing::frobenius_with_pairs(example_s(), example_d(), {{0, 0}, {1, 1}});
  EXPECT_DOUBLE_EQ(v.value, frob / 2.0);
}

TEST(DistJp, IdentityAndUnmatched) {
  const AttributeMatrix s = random_signs(8, 3, 5);
  EXPECT_DOUBLE_EQ(dist_jp(s, s).value, 0.0);

  const AttributeMatrix one = random_signs(8, 1, 6);
  const AttributeMatrix two = hconcat(one, random_signs(8, 1, 7));
  const DistanceValue v = dist_jp(one, two);
  EXPECT_DOUBLE_EQ(v.per_column[0], 0.0);
  EXPECT_DOUBLE_EQ(v.per_column[1], 8.0);
  EXPECT_DOUBLE_EQ(v.value, 4.0);
}

TEST(DistJp, MatchedPairIdentityAndFrobenius) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const AttributeMatrix s = random_signs(64, 3 + seed % 5, seed);
    const AttributeMatrix d = random_signs(64, 2 + seed % 7, seed + 77);
    const PairSet p = greedy_pair(s, d);
    const DistanceValue v = dist_jp(s, d);
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (const MatchedPair& m : p.pairs) {
      EXPECT_EQ(v.per_column[m.discovered], 4.0 * 64.0 * (1.0 - m.correlation));
      pairs.emplace_back(m.meaningful, m.discovered);
    }
    const double frob = testing::frobenius_with_pairs(s, d, pairs);
    EXPECT_NEAR(v.value, frob / static_cast<double>(d.n_attrs()), 1e-12);
  }
}

TEST(DistJp, GreedyIsAtLeastOptimalAssignment) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const std::size_t j = 2 + seed % 5;
    const AttributeMatrix s = random_signs(12, j, seed);
    const AttributeMatrix d = random_signs(12, j, seed + 500);
    EXPECT_GE(dist_jp(s, d).value + 1e-12, testing::brute_force_assignment(s, d));
  }
}

TEST(SimplexLsq, HullVertex) {
  const AttributeMatrix s = random_signs(10, 4, 2);
  const SimplexSolution sol = simplex_lsq(s, s.column(2));
  EXPECT_TRUE(sol.converged);
  EXPECT_NEAR(sol.residual_sq, 0.0, 1e-12);
  EXPECT_NEAR(sol.coefficients(2), 1.0, 1e-12);
  EXPECT_NEAR(sol.coefficients.sum(), 1.0, 1e-12);
}

TEST(SimplexLsq, TwoColumnExample) {
  const AttributeMatrix s = from_rows({{1, 1}, {1, -1}});
  const AttributeMatrix z = column_vector({-1, -1});
  const double oracle = testing::simplex_grid_min(s, 0, z);
  EXPECT_NEAR(oracle, 4.0, 1e-12);
  const SimplexSolution sol = simplex_lsq(s, z.column(0));
  EXPECT_NEAR(sol.residual_sq, 4.0, 1e-9);
  EXPECT_NEAR(sol.coefficients(0), 0.0, 1e-9);
  EXPECT_NEAR(sol.coefficients(1), 1.0, 1e-9);
}

TEST(SimplexLsq, SingletonSimplex) {
  const AttributeMatrix s = column_vector({1, -1, 1, 1});
  const AttributeMatrix z = column_vector({1, 1, -1, 1});
  const SimplexSolution sol = simplex_lsq(s, z.column(0));
  ASSERT_EQ(sol.coefficients.size(), 1);
  EXPECT_DOUBLE_EQ(sol.coefficients(0), 1.0);
  EXPECT_DOUBLE_EQ(sol.residual_sq, 8.0);
}

TEST(SimplexLsq, MatchesGridOracleForSmallJ) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::size_t j = 1 + seed % 3;
    const AttributeMatrix s = random_signs(9, j, seed);
    const AttributeMatrix z = random_signs(9, 1, seed + 300);
    const SimplexSolution sol = simplex_lsq(s, z.column(0));
    const double oracle = testing::simplex_grid_min(s, 0, z, 1e-3);
    // The grid can only overestimate the true minimum.
    EXPECT_LE(sol.residual_sq, oracle + 1e-9);
    EXPECT_NEAR(sol.residual_sq, oracle, 1e-3);
  }
}

TEST(SimplexLsq, FeasibleEvenWithoutConvergence) {
  const AttributeMatrix s = random_signs(40, 12, 8);
  const AttributeMatrix z = random_signs(40, 1, 9);
  const SimplexSolution sol = simplex_lsq(s, z.column(0), {1e-14, 2});
  EXPECT_FALSE(sol.converged);
  EXPECT_LE(sol.iterations, 2u);
  EXPECT_GE(sol.coefficients.minCoeff(), 0.0);
  EXPECT_NEAR(sol.coefficients.sum(), 1.0, 1e-9);
}

TEST(SimplexLsq, RejectsNonPositiveTolerance) {
  const AttributeMatrix s = random_signs(4, 2, 1);
  EXPECT_THROW(simplex_lsq(s, s.column(0), {0.0, 10}), Error);
}

TEST(DistLsq, SquareFullRank) {
  const AttributeMatrix s = from_rows({{1, 1}, {1, -1}});
  EXPECT_NEAR(dist_lsq(s, random_signs(2, 5, 1)).value, 0.0, 1e-12);
}

TEST(DistLsq, OneDimensionalClosedForm) {
  const AttributeMatrix s = column_vector({1, 1, 1});
  const AttributeMatrix z = column_vector({1, 1, -1});
  // Scalar grid search over c as an independent check of 8/3.
  double best = 1e9;
  for (int i = -2000; i <= 2000; ++i) {
    const double c = i * 1e-3;
    best = std::min(best, (c - 1) * (c - 1) * 2 + (c + 1) * (c + 1));
  }
  EXPECT_NEAR(best, 8.0 / 3.0, 1e-5);
  EXPECT_NEAR(dist_lsq(s, z).value, 8.0 / 3.0, 1e-12);
}

TEST(DistLsq, IdentityAndRankDeficiency) {
  const AttributeMatrix s = random_signs(12, 4, 3);
  EXPECT_NEAR(dist_lsq(s, s).value, 0.0, 1e-10);
  // Duplicate columns make A rank deficient; the residual is unchanged.
  const AttributeMatrix dup = hconcat(s, s);
  const AttributeMatrix d = random_signs(12, 3, 4);
  EXPECT_NEAR(dist_lsq(dup, d).value, dist_lsq(s, d).value, 1e-9);
}

TEST(Distances, CvxIdentity) {
  const AttributeMatrix s = random_signs(30, 6, 12);
  const std::vector<std::size_t> picks{3, 0, 3, 5};
  const AttributeMatrix d = s.select_columns(picks);
  EXPECT_LE(dist_cvx(s, d).value, 1e-8);
  EXPECT_DOUBLE_EQ(dist_jp(s, s).value, 0.0);
}

TEST(Distances, CvxSingleColumnExample) {
  const AttributeMatrix s = from_rows({{1, 1}, {1, -1}});
  EXPECT_NEAR(dist_cvx(s, column_vector({-1, -1})).value, 4.0, 1e-9);
}

TEST(Distances, ConstraintMonotonicityAndBounds) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const AttributeMatrix s = random_signs(16, 4, seed);
    const AttributeMatrix d = random_signs(16, 4, seed + 10000);
    const double lsq = dist_lsq(s, d).value;
    const double cvx = dist_cvx(s, d).value;
    const double jp = dist_jp(s, d).value;
    EXPECT_GE(cvx, lsq - 1e-8) << "seed " << seed;
    for (double v : {lsq, cvx, jp}) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 4.0 * 16.0);
    }
  }
}

TEST(Distances, PermutationInvariance) {
  int checked_jp = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const AttributeMatrix s = random_signs(200, 5, seed);
    const AttributeMatrix d = random_signs(200, 6, seed + 1);
    const AttributeMatrix s_perm = permute_columns(s, seed + 2);
    const AttributeMatrix d_perm = permute_columns(d, seed + 3);
    std::vector<Eigen::Index> rows(200);
    std::iota(rows.begin(), rows.end(), Eigen::Index{0});
    std::mt19937_64 gen(seed + 4);
    std::shuffle(rows.begin(), rows.end(), gen);
    const AttributeMatrix s_rows = permute_rows(s, rows);
    const AttributeMatrix d_rows = permute_rows(d, rows);

    const double lsq = dist_lsq(s, d).value;
    EXPECT_NEAR(dist_lsq(s_perm, d_perm).value, lsq, 1e-9);
    EXPECT_NEAR(dist_lsq(s_rows, d_rows).value, lsq, 1e-9);

    const double cvx = dist_cvx(s, d).value;
    EXPECT_NEAR(dist_cvx(s_perm, d_perm).value, cvx, 2e-6);
    EXPECT_NEAR(dist_cvx(s_rows, d_rows).value, cvx, 2e-6);

    // Greedy choices between equal correlations depend on column order, so
    // jp is only order-free when no step of the greedy pass had a tie.
    if (!testing::simulate_greedy(s, d).had_tie) {
      ++checked_jp;
      const double jp = dist_jp(s, d).value;
      EXPECT_DOUBLE_EQ(dist_jp(s_perm, d_perm).value, jp);
      EXPECT_DOUBLE_EQ(dist_jp(s_rows, d_rows).value, jp);
    }
  }
  EXPECT_GT(checked_jp, 10);
}

TEST(Distances, LengthMismatch) {
  const AttributeMatrix s = random_signs(4, 2, 1);
  const AttributeMatrix d = random_signs(5, 2, 1);
  for (DistanceKind kind : {DistanceKind::Lsq, DistanceKind::Cvx, DistanceKind::Jp}) {
    try {
      distance(kind, s, d);
      ADD_FAILURE() << "no error for " << to_string(kind);
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::LengthMismatch);
    }
  }
}

TEST(Distances, DeterministicRepeat) {
  const AttributeMatrix s = random_signs(50, 8, 21);
  const AttributeMatrix d = random_signs(50, 9, 22);
  for (DistanceKind kind : {DistanceKind::Lsq, DistanceKind::Cvx, DistanceKind::Jp}) {
    EXPECT_EQ(distance(kind, s, d).per_column, distance(kind, s, d).per_column);
  }
  const PairSet a = greedy_pair(s, d);
  const PairSet b = greedy_pair(s, d);
  EXPECT_EQ(a.pairs, b.pairs);
}

}  // namespace
}  // namespace amm
