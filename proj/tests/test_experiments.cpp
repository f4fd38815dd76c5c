#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "twistgas/experiments.hpp"

using namespace twistgas;

TEST(Experiments, SplitmixKnownValue) {
  // First output of the reference splitmix64 generator seeded with 0.
  EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
  EXPECT_NE(trajectory_seed(1, 0, 1), trajectory_seed(1, 1, 0));
  EXPECT_EQ(trajectory_seed(5, 2, 3), trajectory_seed(5, 2, 3));
}

TEST(Experiments, ParallelForCoversEveryIndexOnce) {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), 7, [&](std::size_t i) { ++hits[i]; });
  for (const int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(parallel_for(10, 3, [](std::size_t i) {
                 if (i == 4) throw std::runtime_error("boom");
               }),
               std::runtime_error);
}

TEST(Experiments, TauBins) {
  EXPECT_EQ(tau_bin(0), 0u);
  EXPECT_EQ(tau_bin(1), 1u);
  EXPECT_EQ(tau_bin(2), 2u);
  EXPECT_EQ(tau_bin(3), 2u);
  EXPECT_EQ(tau_bin(4), 3u);
  EXPECT_EQ(tau_bin(~0ULL), 64u);
}

TEST(Experiments, EscapeMergeIsAssociativeAndOrderFree) {
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<std::uint64_t> tau(0, 1u << 30);
  std::uniform_int_distribution<int> status(0, 3);
  std::vector<EscapeSample> samples;
  for (int i = 0; i < 300; ++i) {
    samples.push_back({static_cast<EscapeStatus>(status(rng)), tau(rng), {}});
  }
  EscapePartial all;
  for (const auto& s : samples) all.add(s);
  std::vector<EscapePartial> parts(3);
  for (std::size_t i = 0; i < samples.size(); ++i) parts[i % 3].add(samples[i]);
  const auto left = merge_partials(merge_partials(parts[0], parts[1]), parts[2]);
  const auto right = merge_partials(parts[0], merge_partials(parts[1], parts[2]));
  const auto swapped = merge_partials(merge_partials(parts[2], parts[0]), parts[1]);
  EXPECT_EQ(left, all);
  EXPECT_EQ(right, all);
  EXPECT_EQ(swapped, all);
  EXPECT_EQ(merge_partials(parts), all);
}

TEST(Experiments, SummarizeExcludesCensored) {
  EscapePartial p;
  std::vector<EscapeSample> samples = {{EscapeStatus::Escaped, 10, {}},
                                       {EscapeStatus::Escaped, 30, {}},
                                       {EscapeStatus::Censored, 1000, {}},
                                       {EscapeStatus::Frozen, 5, {}}};
  for (const auto& s : samples) p.add(s);
  const auto st = summarize(0.1, p, samples);
  EXPECT_EQ(st.n, 4u);
  EXPECT_EQ(st.escaped, 2u);
  EXPECT_DOUBLE_EQ(st.mean_tau, 20.0);
  EXPECT_NEAR(st.stderr_tau, 10.0, 1e-12);
  EXPECT_DOUBLE_EQ(st.censored_fraction(), 0.5);
}

TEST(Experiments, KsDistanceOnExponentialQuantiles) {
  std::vector<std::uint64_t> taus;
  const double mean = 1e6;
  for (int i = 0; i < 1000; ++i) {
    taus.push_back(static_cast<std::uint64_t>(-mean * std::log(1 - (i + 0.5) / 1000)));
  }
  EXPECT_LT(ks_exponential(taus, mean), 0.002);
  EXPECT_GT(ks_exponential(taus, mean / 4), 0.3);
}

TEST(Experiments, FitRecoversExactCoefficients) {
  std::vector<double> x, y, yr;
  for (int i = 1; i <= 8; ++i) {
    const double xi = 1.0 + 0.3 * i;
    x.push_back(xi);
    y.push_back(1.5 * xi - 0.7);
    yr.push_back(2.0 * xi + 0.4 * std::log(xi) - 3.0);
  }
  const auto lin = fit_xy(x, y, FitModel::Linear);
  EXPECT_NEAR(lin.a, 1.5, 1e-12);
  EXPECT_NEAR(lin.c, -0.7, 1e-12);
  EXPECT_NEAR(lin.rms_residual, 0.0, 1e-12);
  const auto ref = fit_xy(x, yr, FitModel::Refined);
  EXPECT_NEAR(ref.a, 2.0, 1e-10);
  EXPECT_NEAR(ref.b, 0.4, 1e-9);
  EXPECT_NEAR(ref.c, -3.0, 1e-9);
}

TEST(Experiments, FitRejectsDegenerateInput) {
  EXPECT_THROW(fit_xy({1, 2}, {1, 2}, FitModel::Linear), DegenerateInput);
  EXPECT_THROW(fit_xy({1, 1, 1}, {1, 2, 3}, FitModel::Linear), DegenerateInput);
  EXPECT_THROW(fit_xy({-1, 1, 2, 3}, {1, 2, 3, 4}, FitModel::Refined), DegenerateInput);
  EXPECT_THROW(fit_xy({1, 2}, {1}, FitModel::Linear), std::invalid_argument);
}

TEST(Experiments, FitScalingUsesLogAxes) {
  std::vector<EscapeStats> stats;
  for (const double l : {0.04, 0.08, 0.16}) {
    EscapeStats s;
    s.lambda = l;
    s.mean_tau = 3.0 / (l * l);
    stats.push_back(s);
  }
  EXPECT_NEAR(fit_scaling(stats, FitModel::Linear).a, 2.0, 1e-12);
  stats[1].lambda = -0.08;
  EXPECT_THROW(fit_scaling(stats, FitModel::Linear), DegenerateInput);
}

TEST(Experiments, EscapeScanIsIndependentOfWorkerCount) {
  EscapeScanConfig cfg;
  cfg.lambda_grid = {0.1, 0.2};
  cfg.samples_per_lambda = 24;
  cfg.sim.rule = TwistRule::tan_center(0.1);
  cfg.sim.max_events = 200000;
  cfg.trap = TrapSpec::u0();
  cfg.master_seed = 42;
  cfg.workers = 1;
  const auto one = escape_scan(cfg);
  cfg.workers = 8;
  const auto many = escape_scan(cfg);
  ASSERT_EQ(one.size(), many.size());
  for (std::size_t i = 0; i < one.size(); ++i) {
    EXPECT_EQ(one[i].mean_tau, many[i].mean_tau);
    EXPECT_EQ(one[i].stderr_tau, many[i].stderr_tau);
    EXPECT_EQ(one[i].histogram, many[i].histogram);
    EXPECT_EQ(one[i].ks_distance, many[i].ks_distance);
    EXPECT_EQ(one[i].n, 24u);
  }
}

TEST(Experiments, EscapeScanValidation) {
  EscapeScanConfig cfg;
  cfg.sim.rule = TwistRule::tan_center(0.1);
  EXPECT_THROW(escape_scan(cfg), std::invalid_argument);
  cfg.lambda_grid = {0.1, -0.1};
  cfg.trap = TrapSpec::u0();
  EXPECT_THROW(escape_scan(cfg), std::invalid_argument);
}

TEST(Experiments, EscapeFromTrappedStateIsImmediate) {
  PhaseState<double> s(2, 0.1);
  s.positions << 0.2, 0.5, 0.7, 0.5;
  s.velocities << 0.0, 1.0, 0.0, -1.0;
  SimParams p;
  p.rule = TwistRule::tan_center(0.2);
  const auto r = escape_time_from(s, p, TrapSpec::u0());
  EXPECT_EQ(r.status, EscapeStatus::Escaped);
  EXPECT_EQ(r.tau, 0u);
}

TEST(Experiments, EscapeCensoredAtBudget) {
  SimParams p;
  p.rule = TwistRule::tan_center(0.001);
  p.max_events = 50;
  Rng rng(2);
  const auto r = escape_time(p, TrapSpec::u0(), rng);
  EXPECT_EQ(r.status, EscapeStatus::Censored);
  EXPECT_EQ(r.tau, 50u);
}

TEST(Experiments, DriftPartialMergeIsExact) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-1.2, 1.2);
  std::normal_distribution<double> du(0.0, 0.01);
  DriftPartial all, a, b;
  for (int i = 0; i < 5000; ++i) {
    const double x = u(rng), d = du(rng);
    all.add(x, d);
    (i % 2 ? a : b).add(x, d);
  }
  EXPECT_EQ(merge_partials(a, b), all);
  EXPECT_EQ(merge_partials(b, a), all);
  const auto curve = summarize(all);
  EXPECT_EQ(curve.total(), 5000u);
  EXPECT_EQ(curve.centers.size(), 40u);
  EXPECT_NEAR(curve.centers.front(), -0.975, 1e-15);
}

TEST(Experiments, DriftCurveWorkerIndependent) {
  DriftConfig cfg;
  cfg.sim.rule = TwistRule::tan_center(-0.05);
  cfg.samples = 16;
  cfg.events_per_sample = 2000;
  cfg.master_seed = 3;
  cfg.workers = 1;
  const auto one = drift_curve(cfg);
  cfg.workers = 5;
  const auto many = drift_curve(cfg);
  EXPECT_EQ(one.mean_du, many.mean_du);
  EXPECT_EQ(one.counts, many.counts);
  EXPECT_GT(one.total(), 0u);
}

TEST(Experiments, SStarStateIsSymmetric) {
  Rng rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto s = random_sstar_state(0.1, rng);
    EXPECT_EQ((s.velocity(0) + s.velocity(1)).norm(), 0.0);
    EXPECT_NEAR(s.positions(0, 1) + s.positions(1, 1), 1.0, 1e-15);
    EXPECT_NEAR(kinetic_energy(s), 1.0, 1e-14);
    const auto p = perturb_state(s, 1e-3, rng);
    EXPECT_NEAR(kinetic_energy(p), 1.0, 1e-14);
    EXPECT_GT((p.velocity(0) + p.velocity(1)).norm(), 0.0);
  }
}

TEST(Experiments, SStarDecaySequencesShrink) {
  Rng rng(12);
  const auto rule = TwistRule::reversible_shear(0.25);
  const auto start = perturb_state(random_sstar_state(0.1, rng), 1e-3, rng);
  const auto decay = sstar_decay(start, rule, 400, 10'000'000);
  ASSERT_EQ(decay.records.size(), 400u);
  EXPECT_FALSE(decay.records.front().odd);
  ASSERT_TRUE(decay.dv_fit.has_value());
  EXPECT_LT(decay.dv_fit->a, 0.0);
  EXPECT_THROW(sstar_decay(PhaseState<double>(3, 0.1), rule, 1, 1), std::invalid_argument);
}

TEST(Experiments, TrapInvarianceSmall) {
  InvarianceConfig cfg;
  cfg.sim.rule = TwistRule::tan_center(0.2);
  cfg.trap = TrapSpec::u0();
  cfg.trajectories = 8;
  cfg.events_after = 5000;
  cfg.sim.max_events = 1'000'000;
  const auto u0 = trap_invariance(cfg);
  EXPECT_EQ(u0.trapped + u0.missing, 8u);
  EXPECT_EQ(u0.pair_collisions, 0u);
  EXPECT_EQ(u0.exits, 0u);

  cfg.sim.rule = TwistRule::tan_center(-0.2);
  cfg.trap = TrapSpec::wpm();
  const auto w = trap_invariance(cfg);
  EXPECT_EQ(w.trapped, 8u);
  EXPECT_EQ(w.momentum_decreases, 0u);
  EXPECT_EQ(w.exits, 0u);
}
