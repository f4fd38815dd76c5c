#include "twistgas/experiments.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

namespace twistgas {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t lambda_index,
                              std::uint64_t sample_index) {
  return splitmix64(splitmix64(splitmix64(master) ^ lambda_index) ^ sample_index);
}

int default_workers() {
  if (const char* env = std::getenv("TWISTGAS_WORKERS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

void parallel_for_workers(std::size_t n, int workers,
                          const std::function<void(std::size_t, int)>& task) {
  if (workers <= 0) workers = default_workers();
  workers = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers),
                                                   std::max<std::size_t>(n, 1)));
  if (workers == 1) {
    for (std::size_t i = 0; i < n; ++i) task(i, 0);
    return;
  }
  const std::size_t chunk = std::max<std::size_t>(1, n / (static_cast<std::size_t>(workers) * 16));
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (!failed.load()) {
          const std::size_t start = next.fetch_add(chunk);
          if (start >= n) break;
          const std::size_t stop = std::min(n, start + chunk);
          for (std::size_t i = start; i < stop; ++i) task(i, w);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed = true;
      }
    });
  }
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

int resolve_workers(int workers) { return workers > 0 ? workers : default_workers(); }

}  // namespace

void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task) {
  parallel_for_workers(n, workers, [&](std::size_t i, int) { task(i); });
}

std::string to_string(EscapeStatus status) {
  switch (status) {
    case EscapeStatus::Escaped: return "escaped";
    case EscapeStatus::Censored: return "censored";
    case EscapeStatus::Frozen: return "frozen";
    case EscapeStatus::Anomaly: return "anomaly";
  }
  return "unknown";
}

EscapeSample escape_time_from(PhaseState<double> state, const SimParams& params,
                              const TrapSpec& trap) {
  EscapeSample out;
  try {
    check_trap_consistency(trap, params.rule, static_cast<int>(state.size()));
    if (is_trapped(state, trap, params.rule)) {
      out.status = EscapeStatus::Escaped;
      out.tau = state.collisions;
      return out;
    }
    const auto stop = [&](const PhaseState<double>& s, const StepOutcome<double>&) {
      return is_trapped(s, trap, params.rule);
    };
    const auto result = run_until(state, params.rule, stop, params.max_events,
                                  params.tolerances);
    out.tau = state.collisions;
    switch (result.reason) {
      case StopReason::Trapped: out.status = EscapeStatus::Escaped; break;
      case StopReason::Frozen: out.status = EscapeStatus::Frozen; break;
      case StopReason::Budget: out.status = EscapeStatus::Censored; break;
    }
  } catch (const std::invalid_argument&) {
    throw;
  } catch (const std::exception& e) {
    out.status = EscapeStatus::Anomaly;
    out.tau = state.collisions;
    out.error = e.what();
  }
  return out;
}

EscapeSample escape_time(const SimParams& params, const TrapSpec& trap, Rng& rng) {
  params.validate();
  PhaseState<double> start;
  try {
    start = sample_initial_state(params, rng);
  } catch (const SamplingError& e) {
    return {EscapeStatus::Anomaly, 0, e.what()};
  }
  return escape_time_from(std::move(start), params, trap);
}

std::size_t tau_bin(std::uint64_t tau) {
  if (tau == 0) return 0;
  return static_cast<std::size_t>(64 - __builtin_clzll(tau));
}

void EscapePartial::add(const EscapeSample& sample) {
  switch (sample.status) {
    case EscapeStatus::Escaped: {
      ++escaped;
      const unsigned __int128 t = sample.tau;
      sum_tau += t;
      sum_tau_sq += t * t;
      ++histogram[tau_bin(sample.tau)];
      break;
    }
    case EscapeStatus::Censored: ++censored; break;
    case EscapeStatus::Frozen: ++frozen; break;
    case EscapeStatus::Anomaly: ++anomalies; break;
  }
}

EscapePartial merge_partials(const EscapePartial& a, const EscapePartial& b) {
  EscapePartial out = a;
  out.escaped += b.escaped;
  out.censored += b.censored;
  out.frozen += b.frozen;
  out.anomalies += b.anomalies;
  out.sum_tau += b.sum_tau;
  out.sum_tau_sq += b.sum_tau_sq;
  for (std::size_t i = 0; i < kTauBins; ++i) out.histogram[i] += b.histogram[i];
  return out;
}

EscapePartial merge_partials(const std::vector<EscapePartial>& parts) {
  EscapePartial out;
  for (const auto& p : parts) out = merge_partials(out, p);
  return out;
}

double ks_exponential(std::vector<std::uint64_t> taus, double mean) {
  if (taus.empty() || !(mean > 0.0)) return 0.0;
  std::sort(taus.begin(), taus.end());
  const double n = static_cast<double>(taus.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < taus.size(); ++i) {
    const double cdf = -std::expm1(-static_cast<double>(taus[i]) / mean);
    worst = std::max({worst, (i + 1) / n - cdf, cdf - i / n});
  }
  return worst;
}

EscapeStats summarize(double lambda, const EscapePartial& part,
                      const std::vector<EscapeSample>& samples) {
  EscapeStats s;
  s.lambda = lambda;
  s.n = part.total();
  s.escaped = part.escaped;
  s.censored_count = part.censored;
  s.frozen_count = part.frozen;
  s.anomalies = part.anomalies;
  s.histogram = part.histogram;
  if (part.escaped > 0) {
    const auto n = static_cast<long double>(part.escaped);
    const auto sum = static_cast<long double>(part.sum_tau);
    const auto sum_sq = static_cast<long double>(part.sum_tau_sq);
    s.mean_tau = static_cast<double>(sum / n);
    if (part.escaped > 1) {
      const long double var = std::max(0.0L, (sum_sq - sum * sum / n) / (n - 1));
      s.stderr_tau = static_cast<double>(std::sqrt(var / n));
    }
  }
  std::vector<std::uint64_t> taus;
  for (const auto& sample : samples) {
    if (sample.status == EscapeStatus::Escaped) taus.push_back(sample.tau);
  }
  s.ks_distance = ks_exponential(std::move(taus), s.mean_tau);
  return s;
}

void EscapeScanConfig::validate() const {
  if (lambda_grid.empty()) throw std::invalid_argument("lambda_grid is empty");
  for (const double l : lambda_grid) {
    if (l == 0.0 || !std::isfinite(l)) {
      throw std::invalid_argument("lambda_grid entries must be finite and nonzero");
    }
  }
  if (samples_per_lambda < 1) throw std::invalid_argument("samples_per_lambda must be >= 1");
  sim.validate();
  for (const double l : lambda_grid) {
    TwistRule rule = sim.rule;
    rule.lambda = l;
    check_trap_consistency(trap, rule, sim.n_disks);
  }
}

std::vector<EscapeStats> escape_scan(const EscapeScanConfig& cfg) {
  cfg.validate();
  const std::size_t per = static_cast<std::size_t>(cfg.samples_per_lambda);
  const std::size_t n_lambda = cfg.lambda_grid.size();
  const int workers = resolve_workers(cfg.workers);
  std::vector<EscapeSample> samples(n_lambda * per);
  std::vector<std::vector<EscapePartial>> partials(
      static_cast<std::size_t>(workers), std::vector<EscapePartial>(n_lambda));
  parallel_for_workers(samples.size(), workers, [&](std::size_t idx, int w) {
    const std::size_t li = idx / per;
    const std::size_t si = idx % per;
    SimParams params = cfg.sim;
    params.rule.lambda = cfg.lambda_grid[li];
    Rng rng(trajectory_seed(cfg.master_seed, li, si));
    samples[idx] = escape_time(params, cfg.trap, rng);
    partials[static_cast<std::size_t>(w)][li].add(samples[idx]);
  });
  std::vector<EscapeStats> out;
  for (std::size_t li = 0; li < n_lambda; ++li) {
    EscapePartial total;
    for (const auto& worker : partials) total = merge_partials(total, worker[li]);
    const std::vector<EscapeSample> slice(samples.begin() + static_cast<std::ptrdiff_t>(li * per),
                                          samples.begin() + static_cast<std::ptrdiff_t>((li + 1) * per));
    out.push_back(summarize(cfg.lambda_grid[li], total, slice));
  }
  return out;
}

std::string to_string(FitModel model) {
  return model == FitModel::Linear ? "linear" : "refined";
}

FitResult fit_xy(const std::vector<double>& x, const std::vector<double>& y,
                 FitModel model) {
  if (x.size() != y.size()) throw std::invalid_argument("fit needs equal-length x and y");
  const Eigen::Index rows = static_cast<Eigen::Index>(x.size());
  const Eigen::Index cols = model == FitModel::Linear ? 2 : 3;
  if (rows < cols + 1) {
    throw DegenerateInput("fit needs at least " + std::to_string(cols + 1) + " points");
  }
  Eigen::MatrixXd design(rows, cols);
  Eigen::VectorXd rhs(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double xr = x[static_cast<std::size_t>(r)];
    if (!std::isfinite(xr) || !std::isfinite(y[static_cast<std::size_t>(r)])) {
      throw DegenerateInput("fit data must be finite");
    }
    design(r, 0) = xr;
    if (model == FitModel::Refined) {
      if (!(xr > 0.0)) throw DegenerateInput("refined fit needs x > 0");
      design(r, 1) = std::log(xr);
    }
    design(r, cols - 1) = 1.0;
    rhs(r) = y[static_cast<std::size_t>(r)];
  }
  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < cols) throw DegenerateInput("singular least-squares problem");
  const Eigen::VectorXd coef = qr.solve(rhs);
  FitResult fit;
  fit.model = model;
  fit.a = coef(0);
  if (model == FitModel::Refined) fit.b = coef(1);
  fit.c = coef(cols - 1);
  fit.rms_residual = std::sqrt((design * coef - rhs).squaredNorm() / static_cast<double>(rows));
  return fit;
}

FitResult fit_scaling(const std::vector<EscapeStats>& stats, FitModel model) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto& s : stats) {
    if (s.lambda == 0.0) throw DegenerateInput("lambda = 0 has no scaling");
    if ((s.lambda > 0.0) != (stats.front().lambda > 0.0)) {
      throw DegenerateInput("all lambdas must share a sign");
    }
    if (!(s.mean_tau > 0.0)) throw DegenerateInput("mean escape time must be positive");
    x.push_back(-std::log(std::abs(s.lambda)));
    y.push_back(std::log(s.mean_tau));
  }
  return fit_xy(x, y, model);
}

namespace {

constexpr double kFixedScale = 1099511627776.0;  // 2^40

}  // namespace

void DriftPartial::add(double u_before, double du) {
  if (u_before < -1.0) {
    ++below;
    return;
  }
  if (u_before >= 1.0) {
    ++above;
    return;
  }
  const int bin = std::clamp(static_cast<int>(std::floor((u_before + 1.0) * 20.0)), 0, kBins - 1);
  const auto q = static_cast<std::int64_t>(std::llround(du * kFixedScale));
  ++counts[static_cast<std::size_t>(bin)];
  sum_du[static_cast<std::size_t>(bin)] += q;
  sum_du_sq[static_cast<std::size_t>(bin)] +=
      static_cast<unsigned __int128>(static_cast<__int128>(q) * q);
}

DriftPartial merge_partials(const DriftPartial& a, const DriftPartial& b) {
  DriftPartial out = a;
  for (std::size_t i = 0; i < DriftPartial::kBins; ++i) {
    out.counts[i] += b.counts[i];
    out.sum_du[i] += b.sum_du[i];
    out.sum_du_sq[i] += b.sum_du_sq[i];
  }
  out.below += b.below;
  out.above += b.above;
  return out;
}

std::uint64_t DriftCurve::total() const {
  std::uint64_t t = below + above;
  for (const auto c : counts) t += c;
  return t;
}

DriftCurve summarize(const DriftPartial& part) {
  DriftCurve curve;
  curve.below = part.below;
  curve.above = part.above;
  for (int i = 0; i <= DriftPartial::kBins; ++i) curve.edges.push_back(-1.0 + 0.05 * i);
  for (std::size_t i = 0; i < DriftPartial::kBins; ++i) {
    curve.centers.push_back(-1.0 + 0.05 * (static_cast<double>(i) + 0.5));
    curve.counts.push_back(part.counts[i]);
    double mean = 0.0;
    double err = 0.0;
    if (part.counts[i] > 0) {
      const auto n = static_cast<long double>(part.counts[i]);
      const long double sum = static_cast<long double>(part.sum_du[i]) / kFixedScale;
      const long double sum_sq =
          static_cast<long double>(part.sum_du_sq[i]) / (kFixedScale * kFixedScale);
      mean = static_cast<double>(sum / n);
      if (part.counts[i] > 1) {
        const long double var = std::max(0.0L, (sum_sq - sum * sum / n) / (n - 1));
        err = static_cast<double>(std::sqrt(var / n));
      }
    }
    curve.mean_du.push_back(mean);
    curve.stderr_du.push_back(err);
  }
  return curve;
}

DriftCurve drift_curve(const DriftConfig& cfg) {
  cfg.sim.validate();
  if (cfg.samples < 1) throw std::invalid_argument("samples must be >= 1");
  const int workers = resolve_workers(cfg.workers);
  std::vector<DriftPartial> partials(static_cast<std::size_t>(workers));
  parallel_for_workers(static_cast<std::size_t>(cfg.samples), workers, [&](std::size_t s, int w) {
    Rng rng(trajectory_seed(cfg.master_seed, 0, s));
    auto state = sample_initial_state(cfg.sim, rng);
    auto& part = partials[static_cast<std::size_t>(w)];
    const auto never = [](const PhaseState<double>&, const StepOutcome<double>&) { return false; };
    run_until(state, cfg.sim.rule, never, cfg.events_per_sample, cfg.sim.tolerances,
              [&](const PhaseState<double>&, const StepOutcome<double>& out) {
                if (out.event.kind == EventKind::DiskWall) {
                  part.add(out.before_i.x(), out.after_i.x() - out.before_i.x());
                }
              });
  });
  DriftPartial total;
  for (const auto& p : partials) total = merge_partials(total, p);
  return summarize(total);
}

PhaseState<double> sstar_state(double diameter, const Vec2<double>& q1,
                               const Vec2<double>& p1) {
  PhaseState<double> state(2, diameter);
  state.positions.row(0) = q1.transpose();
  state.positions(1, 0) = wrap_unit(q1.x() + 0.5);
  state.positions(1, 1) = 1.0 - q1.y();
  state.velocities.row(0) = p1.transpose();
  state.velocities.row(1) = -p1.transpose();
  return state;
}

PhaseState<double> random_sstar_state(double diameter, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> height(diameter / 2, 1.0 - diameter / 2);
  std::uniform_real_distribution<double> angle(-std::numbers::pi, std::numbers::pi);
  const double x = unit(rng);
  const double y = height(rng);
  const double theta = angle(rng);
  return sstar_state(diameter, {x, y}, {std::cos(theta), std::sin(theta)});
}

PhaseState<double> perturb_state(PhaseState<double> state, double size, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Points<double> kick(state.size(), 2);
  for (Eigen::Index i = 0; i < kick.size(); ++i) kick.data()[i] = normal(rng);
  if (kick.norm() > 0.0) state.velocities += size * kick / kick.norm();
  const double half = state.diameter / 2;
  for (Eigen::Index i = 0; i < state.size(); ++i) {
    state.positions(i, 1) = std::clamp(state.positions(i, 1) + size * normal(rng), half, 1.0 - half);
  }
  const double scale = std::sqrt(static_cast<double>(state.size()) / state.velocities.squaredNorm());
  state.velocities *= scale;
  return state;
}

SStarDecay sstar_decay(PhaseState<double> start, const TwistRule& rule,
                       std::uint64_t n_pair_collisions, std::uint64_t max_events,
                       const ToleranceSet& tol) {
  if (start.size() != 2) throw std::invalid_argument("S* decay needs exactly two disks");
  SStarDecay out;
  std::array<std::uint64_t, 2> wall_hits{};
  std::uint64_t m = 0;
  double previous_dv = (start.velocity(0) + start.velocity(1)).norm();
  const auto stop = [&](const PhaseState<double>&, const StepOutcome<double>&) {
    return out.records.size() >= n_pair_collisions;
  };
  const auto observe = [&](const PhaseState<double>& s, const StepOutcome<double>& ev) {
    if (ev.event.kind == EventKind::DiskWall) {
      ++wall_hits[static_cast<std::size_t>(ev.event.i)];
      return;
    }
    DecayRecord r;
    r.collision_index = out.records.size() + 1;
    r.event = s.collisions;
    // The stretch before the first pair collision is not an interval
    // between two of them.
    r.odd = !out.records.empty() && (wall_hits[0] % 2 == 1 || wall_hits[1] % 2 == 1);
    if (r.odd) ++m;
    r.m = m;
    const auto dev = sstar_deviation(s, contact_point(s, ev.event.i, ev.event.j));
    r.dv_before = previous_dv;
    r.dv = dev.dv_norm;
    r.ell = dev.ell;
    r.log_dv = std::log(r.dv);
    r.log_ell = std::log(std::abs(r.ell));
    previous_dv = r.dv;
    wall_hits = {};
    out.records.push_back(r);
  };
  out.reason = run_until(start, rule, stop, max_events, tol, observe).reason;
  out.m = m;

  std::vector<double> x_dv, y_dv, x_ell, y_ell;
  bool any_above = false;
  for (const auto& r : out.records) {
    if (r.dv >= kDecayFloor) {
      x_dv.push_back(static_cast<double>(r.m));
      y_dv.push_back(r.log_dv);
      any_above = true;
    }
    if (std::abs(r.ell) >= kDecayFloor) {
      x_ell.push_back(static_cast<double>(r.m));
      y_ell.push_back(r.log_ell);
      any_above = true;
    }
  }
  out.exact = !any_above;
  const auto try_fit = [](const std::vector<double>& x, const std::vector<double>& y)
      -> std::optional<FitResult> {
    try {
      return fit_xy(x, y, FitModel::Linear);
    } catch (const DegenerateInput&) {
      return std::nullopt;
    }
  };
  out.dv_fit = try_fit(x_dv, y_dv);
  out.ell_fit = try_fit(x_ell, y_ell);
  return out;
}

namespace {

struct InvarianceSample {
  bool trapped = false;
  bool frozen = false;
  std::uint64_t pair_collisions = 0;
  std::uint64_t momentum_decreases = 0;
  std::uint64_t exits = 0;
  std::uint64_t events = 0;
  std::uint64_t max_pair_gap = 0;
  double min_u = 0.0;
  double max_u = 0.0;
};

InvarianceSample run_invariance(const InvarianceConfig& cfg, std::size_t t) {
  InvarianceSample out;
  const TwistRule& rule = cfg.sim.rule;
  for (int attempt = 0; attempt < cfg.max_attempts && !out.trapped; ++attempt) {
    Rng rng(trajectory_seed(cfg.master_seed, t, static_cast<std::uint64_t>(attempt)));
    auto state = sample_initial_state(cfg.sim, rng);
    std::uint64_t last_pair = 0;
    std::uint64_t gap = 0;
    const auto stop = [&](const PhaseState<double>& s, const StepOutcome<double>&) {
      return is_trapped(s, cfg.trap, rule);
    };
    const auto watch = [&](const PhaseState<double>& s, const StepOutcome<double>& ev) {
      if (ev.event.kind == EventKind::DiskDisk) {
        gap = std::max(gap, s.collisions - last_pair);
        last_pair = s.collisions;
      }
    };
    bool entered = is_trapped(state, cfg.trap, rule);
    if (!entered) {
      const auto r = run_until(state, rule, stop, cfg.sim.max_events, cfg.sim.tolerances, watch);
      if (r.reason == StopReason::Frozen) out.frozen = true;
      entered = r.reason == StopReason::Trapped;
    }
    if (!entered) continue;
    out.trapped = true;
    out.max_pair_gap = gap;
    const bool plus = cfg.trap.kind != TrapKind::Wpm ||
                      wpm_region(state, cfg.trap.eps0) == Region::Wplus;
    const auto never = [](const PhaseState<double>&, const StepOutcome<double>&) { return false; };
    const auto check = [&](const PhaseState<double>& s, const StepOutcome<double>& ev) {
      double change = ev.after_i.x() - ev.before_i.x();
      if (ev.event.kind == EventKind::DiskDisk) {
        ++out.pair_collisions;
        change += ev.after_j.x() - ev.before_j.x();
      }
      if ((plus ? -change : change) > cfg.momentum_tol) ++out.momentum_decreases;
      if (!is_trapped(s, cfg.trap, rule)) ++out.exits;
    };
    const auto r = run_until(state, rule, never, cfg.events_after, cfg.sim.tolerances, check);
    if (r.reason == StopReason::Frozen) out.frozen = true;
    out.events = r.n_events;
    out.min_u = state.velocities.col(0).minCoeff();
    out.max_u = state.velocities.col(0).maxCoeff();
  }
  return out;
}

}  // namespace

InvarianceReport trap_invariance(const InvarianceConfig& cfg) {
  cfg.sim.validate();
  check_trap_consistency(cfg.trap, cfg.sim.rule, cfg.sim.n_disks);
  if (cfg.trajectories < 1) throw std::invalid_argument("trajectories must be >= 1");
  std::vector<InvarianceSample> samples(static_cast<std::size_t>(cfg.trajectories));
  parallel_for(samples.size(), cfg.workers,
               [&](std::size_t t) { samples[t] = run_invariance(cfg, t); });
  InvarianceReport report;
  report.min_final_u = std::numeric_limits<double>::infinity();
  report.max_final_u = -std::numeric_limits<double>::infinity();
  for (const auto& s : samples) {
    if (s.frozen) ++report.frozen;
    if (!s.trapped) {
      ++report.missing;
      continue;
    }
    ++report.trapped;
    report.pair_collisions += s.pair_collisions;
    report.momentum_decreases += s.momentum_decreases;
    report.exits += s.exits;
    report.events_checked += s.events;
    report.max_pair_gap = std::max(report.max_pair_gap, s.max_pair_gap);
    report.min_final_u = std::min(report.min_final_u, s.min_u);
    report.max_final_u = std::max(report.max_final_u, s.max_u);
  }
  return report;
}

}  // namespace twistgas
