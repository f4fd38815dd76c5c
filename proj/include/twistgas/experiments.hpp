#ifndef TWISTGAS_EXPERIMENTS_HPP
#define TWISTGAS_EXPERIMENTS_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "twistgas/core.hpp"
#include "twistgas/engine.hpp"
#include "twistgas/regimes.hpp"

namespace twistgas {

/// splitmix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Seed of one trajectory; depends only on its coordinates in the scan.
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t lambda_index,
                              std::uint64_t sample_index);

/// Worker count from TWISTGAS_WORKERS, else the hardware concurrency.
int default_workers();

/// Runs task(i) for i in [0, n) on `workers` threads. Tasks are handed out
/// in contiguous chunks; the first exception is rethrown after all threads
/// finish.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& task);

enum class EscapeStatus { Escaped, Censored, Frozen, Anomaly };

std::string to_string(EscapeStatus status);

struct EscapeSample {
  EscapeStatus status = EscapeStatus::Censored;
  std::uint64_t tau = 0;  // collision count at detection, or at the stop
  std::string error;      // Anomaly only
};

/// Samples a random initial state and runs until the trap fires.
EscapeSample escape_time(const SimParams& params, const TrapSpec& trap, Rng& rng);

/// Same, from a given state.
EscapeSample escape_time_from(PhaseState<double> state, const SimParams& params,
                              const TrapSpec& trap);

/// log2 bins: bin 0 holds tau = 0, bin b >= 1 holds 2^(b-1) <= tau < 2^b.
constexpr std::size_t kTauBins = 65;
std::size_t tau_bin(std::uint64_t tau);

/// Mergeable escape statistics. Integer accumulators make merging exact, so
/// any partition of the samples gives the same aggregate.
struct EscapePartial {
  std::uint64_t escaped = 0;
  std::uint64_t censored = 0;
  std::uint64_t frozen = 0;
  std::uint64_t anomalies = 0;
  unsigned __int128 sum_tau = 0;
  unsigned __int128 sum_tau_sq = 0;
  std::array<std::uint64_t, kTauBins> histogram{};

  void add(const EscapeSample& sample);
  std::uint64_t total() const { return escaped + censored + frozen + anomalies; }
  bool operator==(const EscapePartial&) const = default;
};

EscapePartial merge_partials(const EscapePartial& a, const EscapePartial& b);
EscapePartial merge_partials(const std::vector<EscapePartial>& parts);

struct EscapeStats {
  double lambda = 0.0;
  std::uint64_t n = 0;  // all samples, including censored ones
  std::uint64_t escaped = 0;
  double mean_tau = 0.0;  // over escaped samples
  double stderr_tau = 0.0;
  std::uint64_t censored_count = 0;
  std::uint64_t frozen_count = 0;
  std::uint64_t anomalies = 0;
  std::array<std::uint64_t, kTauBins> histogram{};
  double ks_distance = 0.0;  // against an exponential with the sample mean

  double censored_fraction() const {
    return n == 0 ? 0.0 : static_cast<double>(censored_count + frozen_count) / n;
  }
};

EscapeStats summarize(double lambda, const EscapePartial& part,
                      const std::vector<EscapeSample>& samples);

/// Kolmogorov-Smirnov distance between escaped taus and Exp(mean).
double ks_exponential(std::vector<std::uint64_t> taus, double mean);

struct EscapeScanConfig {
  std::vector<double> lambda_grid;
  int samples_per_lambda = 1000;
  TrapSpec trap{};
  SimParams sim{};  // rule family taken from here, lambda from the grid
  int workers = 0;  // 0 = default_workers()
  std::uint64_t master_seed = 0;

  void validate() const;
};

std::vector<EscapeStats> escape_scan(const EscapeScanConfig& cfg);

enum class FitModel { Linear, Refined };

std::string to_string(FitModel model);

struct FitResult {
  FitModel model = FitModel::Linear;
  double a = 0.0;  // slope in x
  double b = 0.0;  // coefficient of ln x (refined only)
  double c = 0.0;
  double rms_residual = 0.0;
};

/// Least squares of y against x with basis {x, 1} or {x, ln x, 1}.
FitResult fit_xy(const std::vector<double>& x, const std::vector<double>& y,
                 FitModel model);

/// Fit of y = ln mu_tau against x = -ln|lambda|.
FitResult fit_scaling(const std::vector<EscapeStats>& stats, FitModel model);

struct DriftPartial {
  static constexpr int kBins = 40;  // width 0.05 over [-1, 1]
  std::array<std::uint64_t, kBins> counts{};
  std::array<__int128, kBins> sum_du{};  // fixed point, 2^-40 units
  std::array<unsigned __int128, kBins> sum_du_sq{};
  std::uint64_t below = 0;  // u < -1
  std::uint64_t above = 0;  // u >= 1

  void add(double u_before, double du);
  bool operator==(const DriftPartial&) const = default;
};

DriftPartial merge_partials(const DriftPartial& a, const DriftPartial& b);

struct DriftCurve {
  std::vector<double> edges;  // kBins + 1 edges
  std::vector<double> centers;
  std::vector<double> mean_du;
  std::vector<double> stderr_du;
  std::vector<std::uint64_t> counts;
  std::uint64_t below = 0;
  std::uint64_t above = 0;

  std::uint64_t total() const;
};

DriftCurve summarize(const DriftPartial& part);

struct DriftConfig {
  SimParams sim{};
  int samples = 1000;
  std::uint64_t events_per_sample = 10000;
  int workers = 0;
  std::uint64_t master_seed = 0;
};

/// Per-bin mean change of u at wall collisions, binned by u before the hit.
DriftCurve drift_curve(const DriftConfig& cfg);

/// Exactly symmetric two-disk state: q2 is q1 reflected through the point
/// (x1 + 1/4, 1/2) and p2 = -p1.
PhaseState<double> sstar_state(double diameter, const Vec2<double>& q1,
                               const Vec2<double>& p1);

/// Random exact S* state with unit speeds.
PhaseState<double> random_sstar_state(double diameter, Rng& rng);

/// Moves a state off S*: velocities get a random 4-vector of norm `size`,
/// y1 and y2 shift by `size` times independent standard normals, and the
/// kinetic energy is restored to N/2.
PhaseState<double> perturb_state(PhaseState<double> state, double size, Rng& rng);

struct DecayRecord {
  std::uint64_t collision_index = 0;  // 1-based count of disk-disk collisions
  std::uint64_t event = 0;            // collision counter of the event
  std::uint64_t m = 0;                // odd-parity intervals so far
  bool odd = false;                   // the interval ending here
  double dv_before = 0.0;             // |p1 + p2| at the previous pair collision
  double dv = 0.0;
  double ell = 0.0;
  double log_dv = 0.0;  // -inf when exact
  double log_ell = 0.0;
};

struct SStarDecay {
  std::vector<DecayRecord> records;
  std::uint64_t m = 0;
  std::optional<FitResult> dv_fit;   // log|dv| against m
  std::optional<FitResult> ell_fit;  // log|ell| against m
  bool exact = false;                // every value below the floor
  StopReason reason = StopReason::Budget;
};

/// Values below this are roundoff and excluded from the decay fits.
constexpr double kDecayFloor = 1e-14;

/// Runs from `start` until n_pair_collisions disk-disk collisions (or the
/// event budget) and records the decay sequences.
SStarDecay sstar_decay(PhaseState<double> start, const TwistRule& rule,
                       std::uint64_t n_pair_collisions, std::uint64_t max_events,
                       const ToleranceSet& tol = {});

struct InvarianceConfig {
  SimParams sim{};
  TrapSpec trap{};
  int trajectories = 1000;
  std::uint64_t events_after = 100000;
  int max_attempts = 20;  // fresh starts per trajectory when one is censored
  int workers = 0;
  std::uint64_t master_seed = 0;
  double momentum_tol = 1e-12;  // allowed roundoff decrease of M_u
};

struct InvarianceReport {
  std::uint64_t trapped = 0;       // trajectories that entered the trap
  std::uint64_t missing = 0;       // never trapped within the attempts
  std::uint64_t pair_collisions = 0;  // after entry (U0 soundness)
  std::uint64_t momentum_decreases = 0;  // after entry (W monotonicity)
  std::uint64_t exits = 0;         // events at which the trap test failed
  std::uint64_t frozen = 0;
  std::uint64_t events_checked = 0;  // events run after entry, summed
  std::uint64_t max_pair_gap = 0;  // longest run of events without a pair collision before entry
  double min_final_u = 0.0;        // smallest u over all disks at the end
  double max_final_u = 0.0;
};

InvarianceReport trap_invariance(const InvarianceConfig& cfg);

}  // namespace twistgas

#endif  // TWISTGAS_EXPERIMENTS_HPP
