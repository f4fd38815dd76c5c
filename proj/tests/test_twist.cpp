#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "twistgas/twist.hpp"

using namespace twistgas;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct reading of the two laws, used as an oracle.
double oracle_f(const TwistRule& rule, Wall k, double phi) {
  switch (rule.family) {
    case Family::Specular:
      return phi;
    case Family::TanCenter: {
      const double t = std::exp(rule.lambda) * std::tan(phi);
      double psi = std::atan(t);
      if (psi < 0) psi += kPi;
      return psi;
    }
    case Family::ReversibleShear: {
      const double sign = k == Wall::Bottom ? 1.0 : -1.0;
      const double c = sign * rule.lambda + 1.0 / std::tan(phi);
      double psi = std::atan(1.0 / c);
      if (psi < 0) psi += kPi;
      return psi;
    }
  }
  return phi;
}

std::vector<TwistRule> sample_rules() {
  return {TwistRule::specular(),           TwistRule::tan_center(0.3),
          TwistRule::tan_center(-0.7),     TwistRule::reversible_shear(0.25),
          TwistRule::reversible_shear(-1.0)};
}

}  // namespace

TEST(Twist, MatchesDirectFormulas) {
  for (const auto& rule : sample_rules()) {
    for (const Wall k : {Wall::Bottom, Wall::Top}) {
      for (int i = 1; i < 200; ++i) {
        const double phi = kPi * i / 200;
        if (std::abs(phi - kPi / 2) < 1e-12) continue;
        EXPECT_NEAR(apply_f(rule, k, phi), oracle_f(rule, k, phi), 1e-12)
            << to_string(rule.family) << " phi=" << phi;
      }
    }
  }
}

TEST(Twist, EndpointsAreFixed) {
  for (const auto& rule : sample_rules()) {
    for (const Wall k : {Wall::Bottom, Wall::Top}) {
      EXPECT_EQ(apply_f(rule, k, 0.0), 0.0);
      EXPECT_EQ(apply_f(rule, k, kPi), kPi);
    }
  }
}

TEST(Twist, IsIncreasingHomeomorphism) {
  for (const auto& rule : sample_rules()) {
    for (const Wall k : {Wall::Bottom, Wall::Top}) {
      double prev = -1.0;
      for (int i = 0; i <= 1000; ++i) {
        const double psi = apply_f(rule, k, kPi * i / 1000);
        EXPECT_GT(psi, prev);
        EXPECT_GE(psi, 0.0);
        EXPECT_LE(psi, kPi);
        prev = psi;
      }
    }
  }
}

TEST(Twist, DerivativeMatchesFiniteDifference) {
  const double h = 1e-6;
  for (const auto& rule : sample_rules()) {
    for (const Wall k : {Wall::Bottom, Wall::Top}) {
      for (int i = 1; i < 50; ++i) {
        const double phi = kPi * i / 50;
        const double fd = (apply_f(rule, k, phi + h) - apply_f(rule, k, phi - h)) / (2 * h);
        EXPECT_NEAR(f_derivative(rule, k, phi), fd, 1e-7);
      }
    }
  }
}

TEST(Twist, OutOfRangeAngleThrows) {
  EXPECT_THROW(apply_f(TwistRule::tan_center(0.1), Wall::Bottom, -0.1), std::domain_error);
  EXPECT_THROW(f_derivative(TwistRule::tan_center(0.1), Wall::Bottom, 4.0), std::domain_error);
}

TEST(Twist, VelocityMapPreservesSpeedAndAgreesWithAngles) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> angle(0.01, kPi - 0.01);
  std::uniform_real_distribution<double> speed(0.1, 3.0);
  for (const auto& rule : sample_rules()) {
    for (int n = 0; n < 500; ++n) {
      const double phi = angle(rng);
      const double s = speed(rng);
      // Bottom wall: incoming v < 0.
      const Vec2<double> in_b{s * std::cos(phi), -s * std::sin(phi)};
      const auto out_b = apply_twist_velocity(rule, Wall::Bottom, in_b);
      EXPECT_NEAR(out_b.norm(), s, 1e-12 * s);
      EXPECT_GT(out_b.y(), 0.0);
      EXPECT_NEAR(incidence_angle(out_b), apply_f(rule, Wall::Bottom, phi), 1e-12);
      const Vec2<double> in_t{s * std::cos(phi), s * std::sin(phi)};
      const auto out_t = apply_twist_velocity(rule, Wall::Top, in_t);
      EXPECT_NEAR(out_t.norm(), s, 1e-12 * s);
      EXPECT_LT(out_t.y(), 0.0);
      EXPECT_NEAR(incidence_angle(out_t), apply_f(rule, Wall::Top, phi), 1e-12);
    }
  }
}

TEST(Twist, SpecularKeepsHorizontalVelocity) {
  const Vec2<double> in{0.3, -0.7};
  const auto out = apply_twist_velocity(TwistRule::tan_center(0.0), Wall::Bottom, in);
  EXPECT_DOUBLE_EQ(out.x(), 0.3);
  EXPECT_DOUBLE_EQ(out.y(), 0.7);
}

TEST(Twist, DegenerateHitsThrow) {
  const auto rule = TwistRule::tan_center(0.2);
  EXPECT_THROW(apply_twist_velocity(rule, Wall::Bottom, Vec2<double>{1.0, 0.0}), DegenerateInput);
  EXPECT_THROW(apply_twist_velocity(rule, Wall::Bottom, Vec2<double>{0.5, 0.5}), DegenerateInput);
  EXPECT_THROW(apply_twist_velocity(rule, Wall::Top, Vec2<double>{0.5, -0.5}), DegenerateInput);
}

TEST(Twist, ReversedRuleUndoesAHit) {
  // Reflect, negate, reflect at the same wall under the reversal rule, negate:
  // back to the incoming velocity.
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> angle(0.01, kPi - 0.01);
  for (const auto& rule : sample_rules()) {
    const auto back = time_reversal_rule(rule);
    for (const Wall k : {Wall::Bottom, Wall::Top}) {
      for (int n = 0; n < 200; ++n) {
        const double phi = angle(rng);
        const double sign = k == Wall::Bottom ? -1.0 : 1.0;
        const Vec2<double> in{std::cos(phi), sign * std::sin(phi)};
        const auto out = apply_twist_velocity(rule, k, in);
        const auto again = apply_twist_velocity(back, k, Vec2<double>(-out));
        EXPECT_NEAR((-again - in).norm(), 0.0, 1e-13);
      }
    }
  }
}

TEST(Twist, OppositionHoldsForBothFamilies) {
  for (const auto& rule : sample_rules()) {
    EXPECT_LT(check_opposition(rule, 2001), 1e-13) << to_string(rule.family);
  }
  EXPECT_THROW(check_opposition(TwistRule::specular(), 1), std::invalid_argument);
}

TEST(Twist, ParseFamily) {
  EXPECT_EQ(parse_family("tan-center"), Family::TanCenter);
  EXPECT_EQ(parse_family("reversible-shear"), Family::ReversibleShear);
  EXPECT_EQ(parse_family("specular"), Family::Specular);
  EXPECT_THROW(parse_family("cot"), std::invalid_argument);
  for (const auto f : {Family::Specular, Family::TanCenter, Family::ReversibleShear}) {
    EXPECT_EQ(parse_family(to_string(f)), f);
  }
}

TEST(Twist, RuleEqualityIgnoresLambdaForSpecular) {
  EXPECT_EQ((TwistRule{Family::Specular, 0.4}), TwistRule::specular());
  EXPECT_NE(TwistRule::tan_center(0.1), TwistRule::tan_center(0.2));
}
