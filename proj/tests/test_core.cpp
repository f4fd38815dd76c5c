#include <gtest/gtest.h>

#include "twistgas/core.hpp"

using namespace twistgas;

TEST(Core, WrapUnitStaysInHalfOpenInterval) {
  EXPECT_DOUBLE_EQ(wrap_unit(1.25), 0.25);
  EXPECT_DOUBLE_EQ(wrap_unit(-0.25), 0.75);
  EXPECT_EQ(wrap_unit(1.0), 0.0);
  // -1e-18 wraps to 1 - 1e-18 == 1.0 in double; must not stay at 1.
  EXPECT_LT(wrap_unit(-1e-18), 1.0);
}

TEST(Core, CircularDistance) {
  EXPECT_NEAR(circular_x_distance(0.05, 0.95), 0.1, 1e-15);
  EXPECT_DOUBLE_EQ(circular_x_distance(0.2, 0.5), 0.3);
  EXPECT_DOUBLE_EQ(circular_x_distance(0.0, 0.5), 0.5);
}

TEST(Core, PairDistanceUsesNearestImage) {
  PhaseState<double> s(2, 0.1);
  s.positions << 0.02, 0.5, 0.98, 0.5;
  EXPECT_NEAR(pair_distance(s, 0, 1), 0.04, 1e-15);
  s.positions << 0.1, 0.2, 0.4, 0.6;
  EXPECT_NEAR(pair_distance(s, 0, 1), 0.5, 1e-15);
}

TEST(Core, SimParamsValidation) {
  SimParams p;
  EXPECT_NO_THROW(p.validate());
  p.diameter = 0.5;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SimParams{};
  p.n_disks = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SimParams{};
  p.tolerances.root = 0.0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
  p = SimParams{};
  p.max_events = 0;
  EXPECT_THROW(p.validate(), std::invalid_argument);
}

class SamplingProperty : public ::testing::TestWithParam<int> {};

TEST_P(SamplingProperty, StatesAreValid) {
  SimParams p;
  p.n_disks = GetParam();
  p.diameter = 0.5 / p.n_disks;
  Rng rng(1234 + GetParam());
  for (int k = 0; k < 200; ++k) {
    const auto s = sample_initial_state(p, rng);
    ASSERT_EQ(validate_state(s, p.tolerances), "");
    EXPECT_NEAR(kinetic_energy(s), p.n_disks / 2.0, 1e-12);
    for (int i = 0; i < p.n_disks; ++i) {
      for (int j = i + 1; j < p.n_disks; ++j) EXPECT_GT(pair_distance(s, i, j), p.diameter);
    }
  }
}

INSTANTIATE_TEST_SUITE_P(Sizes, SamplingProperty, ::testing::Values(1, 2, 3, 5));

TEST(Core, SamplingIsDeterministicPerSeed) {
  SimParams p;
  Rng a(99), b(99);
  const auto s1 = sample_initial_state(p, a);
  const auto s2 = sample_initial_state(p, b);
  EXPECT_EQ(s1.positions, s2.positions);
  EXPECT_EQ(s1.velocities, s2.velocities);
}

TEST(Core, VelocityDirectionsLookIsotropic) {
  // Mean of u and v over many single-disk samples is near zero and the two
  // second moments agree.
  SimParams p;
  p.n_disks = 1;
  Rng rng(5);
  double su = 0, sv = 0, suu = 0, svv = 0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const auto s = sample_initial_state(p, rng);
    su += s.velocities(0, 0);
    sv += s.velocities(0, 1);
    suu += s.velocities(0, 0) * s.velocities(0, 0);
    svv += s.velocities(0, 1) * s.velocities(0, 1);
  }
  EXPECT_NEAR(su / n, 0.0, 0.03);
  EXPECT_NEAR(sv / n, 0.0, 0.03);
  EXPECT_NEAR(suu / n, 0.5, 0.02);
  EXPECT_NEAR(svv / n, 0.5, 0.02);
}

TEST(Core, ExhaustedRejectionRaisesSamplingError) {
  // With one attempt, roughly three in four draws of nine fat disks overlap.
  SimParams p;
  p.n_disks = 9;
  p.diameter = 0.11;
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng rng(seed);
    try {
      sample_initial_state(p, rng, 1);
    } catch (const SamplingError&) {
      ++failures;
    }
  }
  EXPECT_GT(failures, 10);
  EXPECT_LT(failures, 40);
}

TEST(Core, ValidateStateReportsProblems) {
  PhaseState<double> s(2, 0.1);
  s.positions << 0.1, 0.5, 0.15, 0.5;
  s.velocities << 1, 0, 0, 1;
  EXPECT_EQ(validate_state(s, {}), "disks overlap");
  s.positions << 0.1, 0.5, 0.5, 0.5;
  EXPECT_EQ(validate_state(s, {}), "");
  s.positions(0, 1) = 0.01;
  EXPECT_EQ(validate_state(s, {}), "y outside wall clearance");
  s.positions(0, 1) = 0.5;
  s.velocities(0, 0) = 2;
  EXPECT_EQ(validate_state(s, {}), "kinetic energy differs from N/2");
}

TEST(Core, CastPreservesValues) {
  PhaseState<double> s(1, 0.1);
  s.positions << 0.3, 0.4;
  s.velocities << 0.6, 0.8;
  s.collisions = 7;
  const auto l = s.cast<long double>();
  EXPECT_EQ(l.collisions, 7u);
  EXPECT_EQ(static_cast<double>(l.velocities(0, 1)), 0.8);
}
