#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "twistgas/map_analysis.hpp"

using namespace twistgas;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(MapAnalysis, TanCenterFixedPointsAndStability) {
  for (const double lambda : {0.1, -0.1, 0.5, -1.0}) {
    const auto points = find_fixed_points(TwistRule::tan_center(lambda));
    ASSERT_EQ(points.size(), 3u) << lambda;
    EXPECT_NEAR(points[0].phi, 0.0, 1e-12);
    EXPECT_NEAR(points[1].phi, kPi / 2, 1e-12);
    EXPECT_NEAR(points[2].phi, kPi, 1e-12);
    EXPECT_TRUE(points[1].is_center);
    // g'(pi/2) = e^{-2 lambda}.
    EXPECT_NEAR(points[1].derivative, std::exp(-2 * lambda), 1e-6);
    const auto center = lambda > 0 ? Stability::Stable : Stability::Unstable;
    const auto ends = lambda > 0 ? Stability::Unstable : Stability::Stable;
    EXPECT_EQ(points[1].stability, center);
    EXPECT_EQ(points[0].stability, ends);
    EXPECT_EQ(points[2].stability, ends);
  }
}

TEST(MapAnalysis, ReversibleShearIsIdentity) {
  for (const double lambda : {0.05, 0.25, -1.0}) {
    const auto rule = TwistRule::reversible_shear(lambda);
    EXPECT_TRUE(is_all_fixed(rule));
    const auto report = analyze_interval_map(rule);
    EXPECT_TRUE(report.all_fixed);
    EXPECT_TRUE(report.intervals.empty());
  }
}

TEST(MapAnalysis, SquareRootDecomposition) {
  for (const auto& rule : {TwistRule::tan_center(0.3), TwistRule::tan_center(-1.0),
                           TwistRule::reversible_shear(0.7), TwistRule::reversible_shear(-1.0)}) {
    const auto h = decompose_h(rule, 10000);
    EXPECT_LT(h.residual, 1e-10);
    for (int i = 0; i <= 100; ++i) {
      const double phi = kPi * i / 100;
      EXPECT_NEAR(eval_h(rule, eval_h(rule, phi)), eval_g(rule, phi), 1e-12);
      EXPECT_NEAR(eval_g_opposed(rule, phi), eval_g(rule, phi), 1e-12);
    }
  }
}

TEST(MapAnalysis, ReversibleShearCenter) {
  // The fixed point of h solves cot(phi) = -lambda / 2.
  for (const double lambda : {0.25, -0.6}) {
    const auto h = decompose_h(TwistRule::reversible_shear(lambda));
    EXPECT_NEAR(1.0 / std::tan(h.center), -lambda / 2, 1e-10);
  }
}

TEST(MapAnalysis, DerivativeChainMatchesNumeric) {
  const auto rule = TwistRule::tan_center(0.4);
  for (int i = 0; i <= 40; ++i) {
    const double phi = kPi * i / 40;
    EXPECT_NEAR(g_derivative_chain(rule, phi), g_derivative_numeric(rule, phi), 1e-6);
  }
}

TEST(MapAnalysis, OrbitIteratesG) {
  const auto rule = TwistRule::tan_center(0.2);
  const auto orbit = one_particle_orbit(rule, 0.4, 20);
  ASSERT_EQ(orbit.size(), 21u);
  double phi = 0.4;
  for (int n = 0; n <= 10; ++n) {
    EXPECT_NEAR(orbit[2 * n], phi, 1e-13);
    phi = eval_g(rule, phi);
  }
  // Stable center: the orbit approaches pi/2 monotonically in distance.
  for (int n = 1; n <= 10; ++n) {
    EXPECT_LT(std::abs(orbit[2 * n] - kPi / 2), std::abs(orbit[2 * n - 2] - kPi / 2));
  }
}

TEST(MapAnalysis, TrichotomyLabels) {
  const auto stable = analyze_interval_map(TwistRule::tan_center(0.1));
  ASSERT_EQ(stable.intervals.size(), 2u);
  for (const auto m : stable.trichotomy_labels) EXPECT_EQ(m, Movement::Toward);
  const auto unstable = analyze_interval_map(TwistRule::tan_center(-0.1));
  for (const auto m : unstable.trichotomy_labels) EXPECT_EQ(m, Movement::Away);
  EXPECT_EQ(classify_point(TwistRule::tan_center(0.1), kPi / 2, kPi / 2), PointClass::Fixed);
  EXPECT_FALSE(stable.dual_pairs.empty());
}

TEST(MapAnalysis, JsonReport) {
  const auto j = to_json(analyze_interval_map(TwistRule::tan_center(0.1)));
  EXPECT_TRUE(j.contains("fixed_points"));
  EXPECT_EQ(j["fixed_points"].size(), 3u);
  EXPECT_NEAR(j["center"].get<double>(), kPi / 2, 1e-12);
}
