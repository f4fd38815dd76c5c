#ifndef TWISTGAS_REGIMES_HPP
#define TWISTGAS_REGIMES_HPP

#include <map>
#include <optional>
#include <string>

#include "twistgas/core.hpp"
#include "twistgas/twist.hpp"

namespace twistgas {

enum class TrapKind { U0, Wpm, SStar };
enum class Region { U0, Wplus, Wminus, SStar };

std::string to_string(TrapKind kind);
std::string to_string(Region region);
TrapKind parse_trap_kind(const std::string& name);

struct TrapSpec {
  TrapKind kind = TrapKind::U0;
  std::optional<double> eps0;  // Wpm: use +-sum(u) > N - eps0 instead of sqrt(N(N-1))
  double tol_momentum = 1e-3;  // SStar
  double tol_center = 1e-3;    // SStar

  static TrapSpec u0() { return {TrapKind::U0, std::nullopt, 1e-3, 1e-3}; }
  static TrapSpec wpm(std::optional<double> eps0 = std::nullopt) {
    return {TrapKind::Wpm, eps0, 1e-3, 1e-3};
  }
  static TrapSpec sstar(double tol_momentum = 1e-3, double tol_center = 1e-3) {
    return {TrapKind::SStar, std::nullopt, tol_momentum, tol_center};
  }

  void validate() const;
};

struct DetectionResult {
  bool trapped = false;
  std::optional<Region> which;
  std::map<std::string, double> diagnostics;
};

/// Sound upper bound on the total future horizontal travel of disk i if it
/// bounced between the walls alone under TanCenter(lambda), lambda > 0:
/// |u/v| * (remaining travel to the next wall + (1 - d) / (1 - e^-lambda)).
/// Returns +inf for a disk moving exactly horizontally.
double displacement_bound_s(const PhaseState<double>& state, int i, double lambda);

/// Stable-center trap: every pair's circular x gap exceeds d + s_i + s_j, so
/// the x-shadows of the disks can never meet again.
DetectionResult in_U0(const PhaseState<double>& state, double lambda);
bool is_in_U0(const PhaseState<double>& state, double lambda);

/// Unstable-center traps: sum(u) > sqrt(N(N-1)) (W+) or < -sqrt(N(N-1)) (W-),
/// or with eps0 given, +-sum(u) > N - eps0.
DetectionResult in_Wpm(const PhaseState<double>& state,
                       std::optional<double> eps0 = std::nullopt);
std::optional<Region> wpm_region(const PhaseState<double>& state,
                                 std::optional<double> eps0 = std::nullopt);

struct SStarDeviation {
  double dv_norm = 0.0;  // |p_1 + p_2|
  double ell = 0.0;      // contact height - 1/2
};

/// Deviation from the symmetric two-disk regime at a disk-disk collision.
SStarDeviation sstar_deviation(const PhaseState<double>& state,
                               const Vec2<double>& contact_point);

/// Contact point of two touching disks (midpoint of the nearest images).
Vec2<double> contact_point(const PhaseState<double>& state, int i, int j);

DetectionResult in_sstar(const PhaseState<double>& state, const TrapSpec& spec);
bool is_in_sstar(const PhaseState<double>& state, const TrapSpec& spec);

/// Trap test dispatch; the rule supplies lambda for U0.
bool is_trapped(const PhaseState<double>& state, const TrapSpec& trap,
                const TwistRule& rule);
DetectionResult detect(const PhaseState<double>& state, const TrapSpec& trap,
                       const TwistRule& rule);

/// Throws unless the trap matches the rule: U0 needs TanCenter with
/// lambda > 0, Wpm needs TanCenter with lambda < 0, SStar needs
/// ReversibleShear with two disks.
void check_trap_consistency(const TrapSpec& trap, const TwistRule& rule, int n_disks);

}  // namespace twistgas

#endif  // TWISTGAS_REGIMES_HPP
