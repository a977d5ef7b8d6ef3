#include <gtest/gtest.h>

#include "amm/calibrate.hpp"
#include "amm/error.hpp"
#include "amm/synth.hpp"
#include "oracles.hpp"

namespace amm {
namespace {

InterpolationCurve linear_curve() {
  InterpolationCurve c;
  c.grid = {0, 10, 20};
  c.mean_delta = {1.0, 2.0, 3.0};
  c.isotonic_delta = c.mean_delta;
  return c;
}

AttributeMatrix small_meaningful() {
  return decision_boundary_set({.n_images = 200, .n_attrs = 32, .label_noise = 0.05});
}

TEST(GenNoise, Deterministic) {
  EXPECT_EQ(*gen_noise(4, 2, 1), *gen_noise(4, 2, 1));
  EXPECT_NE(*gen_noise(64, 2, 1), *gen_noise(64, 2, 2));
}

TEST(GenNoise, Balanced) {
  const AttributeMatrix m = *gen_noise(100, 100, 3);
  const double plus = static_cast<double>((m.entries().array() > 0).count()) / 10000.0;
  EXPECT_GE(plus, 0.45);
  EXPECT_LE(plus, 0.55);
}

TEST(GenNoise, EmptySet) {
  EXPECT_FALSE(gen_noise(10, 0, 1).has_value());
  const AttributeMatrix s2 = testing::random_signs(10, 3, 1);
  EXPECT_EQ(hconcat(s2, gen_noise(10, 0, 1)), s2);
}

TEST(FitInvert, LinearInterpolationAndClamps) {
  const InterpolationCurve c = linear_curve();
  Inversion inv = fit_invert(c, 2.5);
  EXPECT_DOUBLE_EQ(inv.g_star, 15.0);
  EXPECT_FALSE(inv.saturated);
  inv = fit_invert(c, 0.5);
  EXPECT_DOUBLE_EQ(inv.g_star, 0.0);
  EXPECT_FALSE(inv.saturated);
  inv = fit_invert(c, 3.5);
  EXPECT_DOUBLE_EQ(inv.g_star, 20.0);
  EXPECT_TRUE(inv.saturated);
  inv = fit_invert(c, 3.0);
  EXPECT_DOUBLE_EQ(inv.g_star, 20.0);
  EXPECT_FALSE(inv.saturated);
}

TEST(FitInvert, FlatSegmentsTakeSmallestM) {
  InterpolationCurve c;
  c.grid = {0, 1, 2, 4};
  c.isotonic_delta = {1.0, 2.0, 2.0, 3.0};
  c.mean_delta = c.isotonic_delta;
  EXPECT_DOUBLE_EQ(fit_invert(c, 2.0).g_star, 1.0);
}

TEST(FitInvert, MonotoneInDelta) {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int trial = 0; trial < 20; ++trial) {
    InterpolationCurve c;
    c.grid = {0, 1, 2, 4, 8, 16};
    for (std::size_t i = 0; i < c.grid.size(); ++i) c.mean_delta.push_back(u(gen));
    c.isotonic_delta = anchored_isotonic(c.mean_delta);
    double previous = -1.0;
    for (double delta = -0.5; delta < 6.0; delta += 0.01) {
      const double g = fit_invert(c, delta).g_star;
      EXPECT_GE(g, previous);
      previous = g;
    }
  }
}

TEST(Isotonic, PoolsViolators) {
  EXPECT_EQ(isotonic_regression({1.0, 3.0, 2.0}), (std::vector<double>{1.0, 2.5, 2.5}));
  EXPECT_EQ(isotonic_regression({3.0, 2.0, 1.0}), (std::vector<double>{2.0, 2.0, 2.0}));
  EXPECT_EQ(anchored_isotonic({2.0, 1.0, 3.0}), (std::vector<double>{2.0, 2.0, 3.0}));
  EXPECT_EQ(anchored_isotonic({1.0, 4.0, 2.0}), (std::vector<double>{1.0, 3.0, 3.0}));
}

TEST(Isotonic, NondecreasingAndMeanPreserving) {
  std::mt19937_64 gen(8);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(12);
    for (double& x : v) x = noise(gen);
    const std::vector<double> fit = isotonic_regression(v);
    for (std::size_t i = 1; i < fit.size(); ++i) EXPECT_LE(fit[i - 1], fit[i]);
    double a = 0.0, b = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
      a += v[i];
      b += fit[i];
    }
    EXPECT_NEAR(a, b, 1e-9);
  }
}

TEST(GammaScore, Formula) {
  EXPECT_DOUBLE_EQ(gamma_score(0.0, 32), 100.0);
  EXPECT_DOUBLE_EQ(gamma_score(32.0, 32), 50.0);
  EXPECT_DOUBLE_EQ(gamma_score(96.0, 32), 25.0);
  EXPECT_THROW(gamma_score(1.0, 0), Error);
}

TEST(GammaScore, MonotoneNonincreasing) {
  for (std::size_t s2 : {1u, 7u, 32u}) {
    double previous = 101.0;
    for (double g = 0.0; g < 500.0; g += 0.25) {
      const double gamma = gamma_score(g, s2);
      EXPECT_LE(gamma, previous);
      EXPECT_GE(gamma, 0.0);
      EXPECT_LE(gamma, 100.0);
      previous = gamma;
    }
  }
}

TEST(CombinedScore, MeanAndRange) {
  EXPECT_DOUBLE_EQ(combined_score(81.0, 61.0), 71.0);
  EXPECT_DOUBLE_EQ(combined_score(100.0, 100.0), 100.0);
  try {
    combined_score(101.0, 50.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
  EXPECT_THROW(combined_score(50.0, -1.0), Error);
}

TEST(DefaultGrid, PowersOfTwoToCap) {
  EXPECT_EQ(default_grid(32), (std::vector<std::size_t>{0, 1, 2, 4, 8, 16, 32, 64, 128, 256}));
  const auto wide = default_grid(100);
  EXPECT_EQ(wide.back(), 400u);
  EXPECT_EQ(wide[wide.size() - 2], 256u);
}

TEST(InterpolationCurve, NoiseFreePointIsExact) {
  const MeaningfulSplit split = split_meaningful(small_meaningful(), 0.5, 2);
  for (DistanceKind kind : {DistanceKind::Cvx, DistanceKind::Jp, DistanceKind::Lsq}) {
    const InterpolationCurve c = interpolation_curve(split, {0, 4, 16}, kind, 9, {2, {}, 1});
    EXPECT_EQ(c.mean_delta[0], distance(kind, split.s1, split.s2).value);
    EXPECT_EQ(c.isotonic_delta[0], c.mean_delta[0]);
    ASSERT_EQ(c.grid.size(), c.mean_delta.size());
    ASSERT_EQ(c.grid.size(), c.isotonic_delta.size());
    for (std::size_t i = 1; i < c.isotonic_delta.size(); ++i) EXPECT_LE(c.isotonic_delta[i - 1], c.isotonic_delta[i]);
  }
}

TEST(InterpolationCurve, GrowsTowardNoise) {
  const MeaningfulSplit split = split_meaningful(small_meaningful(), 0.5, 2);
  const std::vector<std::size_t> grid{0, 1, 2, 4, 8, 16, 32, 64, 128, 256};
  for (DistanceKind kind : {DistanceKind::Cvx, DistanceKind::Jp}) {
    const InterpolationCurve c = interpolation_curve(split, grid, kind, 11, {5, {}, 0});
    std::vector<double> m(grid.begin(), grid.end());
    EXPECT_GE(testing::spearman(m, c.mean_delta), 0.9) << to_string(kind);

    // Pure noise with as many columns as the last interpolated set.
    const std::size_t size = split.s2.n_attrs() + grid.back();
    double asymptote = 0.0;
    for (std::uint64_t t = 0; t < 5; ++t) asymptote += distance(kind, split.s1, *gen_noise(200, size, 500 + t)).value;
    asymptote /= 5.0;
    EXPECT_NEAR(c.mean_delta.back(), asymptote, 0.1 * asymptote) << to_string(kind);
  }
}

TEST(InterpolationCurve, WorkerCountDoesNotChangeResult) {
  const MeaningfulSplit split = split_meaningful(small_meaningful(), 0.5, 2);
  const auto a = interpolation_curve(split, {0, 2, 8, 32}, DistanceKind::Cvx, 1, {3, {}, 1});
  const auto b = interpolation_curve(split, {0, 2, 8, 32}, DistanceKind::Cvx, 1, {3, {}, 4});
  EXPECT_EQ(a.mean_delta, b.mean_delta);
  EXPECT_EQ(a.nonconverged, b.nonconverged);
}

TEST(InterpolationCurve, RejectsBadGrid) {
  const MeaningfulSplit split = split_meaningful(small_meaningful(), 0.5, 2);
  EXPECT_THROW(interpolation_curve(split, {1, 2}, DistanceKind::Jp, 1), Error);
  EXPECT_THROW(interpolation_curve(split, {0, 2, 2}, DistanceKind::Jp, 1), Error);
  EXPECT_THROW(interpolation_curve(split, {0, 2}, DistanceKind::Jp, 1, {0, {}, 1}), Error);
}

TEST(Evaluate, S2ScoresFullMarks) {
  const AttributeMatrix s = small_meaningful();
  EvaluationConfig config;
  config.grid = {0, 4, 16, 64};
  config.trials = 2;
  const MeaningfulnessCalibrator calibrator(s, config);
  const MeaningfulnessReport r = calibrator.evaluate(calibrator.split().s2);
  EXPECT_DOUBLE_EQ(r.gamma_cvx, 100.0);
  EXPECT_DOUBLE_EQ(r.gamma_jp, 100.0);
  EXPECT_DOUBLE_EQ(r.gamma_tilde, 100.0);
  EXPECT_FALSE(r.degraded);
}

TEST(Evaluate, ReportInvariantsAndDeterminism) {
  const AttributeMatrix s = small_meaningful();
  const AttributeMatrix d = *gen_noise(200, 16, 77);
  EvaluationConfig config;
  config.grid = {0, 4, 16, 64};
  config.trials = 2;
  config.distance_to_full_set = true;
  config.workers = 1;
  const MeaningfulnessReport a = evaluate_meaningfulness(s, d, config);
  config.workers = 3;
  const MeaningfulnessReport b = evaluate_meaningfulness(s, d, config);

  EXPECT_EQ(a.gamma_tilde, (a.gamma_cvx + a.gamma_jp) / 2.0);
  EXPECT_EQ(a.gamma_cvx, b.gamma_cvx);
  EXPECT_EQ(a.gamma_jp, b.gamma_jp);
  EXPECT_EQ(a.result(DistanceKind::Cvx).curve.mean_delta, b.result(DistanceKind::Cvx).curve.mean_delta);
  EXPECT_EQ(a.delta_full_set.size(), 2u);
  for (const CalibrationResult& r : a.results) {
    EXPECT_EQ(r.gamma, gamma_score(r.g_star, 16));
    EXPECT_GE(r.gamma, 0.0);
    EXPECT_LE(r.gamma, 100.0);
  }
}

TEST(Evaluate, Errors) {
  const AttributeMatrix s = small_meaningful();
  EXPECT_THROW(evaluate_meaningfulness(s, testing::random_signs(10, 2, 1)), Error);
  EvaluationConfig bad;
  bad.kinds = {DistanceKind::Cvx};
  try {
    evaluate_meaningfulness(s, s, bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidConfig);
  }
  bad = {};
  bad.grid = {0, 5, 3};
  EXPECT_THROW(evaluate_meaningfulness(s, s, bad), Error);
}

}  // namespace
}  // namespace amm
