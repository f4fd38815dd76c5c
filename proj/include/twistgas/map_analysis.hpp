#ifndef TWISTGAS_MAP_ANALYSIS_HPP
#define TWISTGAS_MAP_ANALYSIS_HPP

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

#include "twistgas/twist.hpp"

namespace twistgas {

enum class Stability { Stable, Unstable, Neutral };
enum class Movement { Toward, Away };

std::string to_string(Stability s);
std::string to_string(Movement m);

struct FixedPoint {
  double phi = 0.0;
  Stability stability = Stability::Neutral;
  bool is_center = false;
  double derivative = 1.0;  // g'(phi)
};

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double mid() const { return 0.5 * (lo + hi); }
  bool contains(double phi) const { return phi > lo && phi < hi; }
};

struct DualPair {
  Interval first;
  Interval second;
  Movement movement = Movement::Toward;
};

struct IntervalMapReport {
  TwistRule rule{};
  bool all_fixed = false;  // g is the identity on the sampled grid
  std::vector<FixedPoint> fixed_points;
  double center = 0.0;
  double h_decomposition_residual = 0.0;
  std::vector<Interval> intervals;       // components of {g(phi) != phi}
  std::vector<Movement> trichotomy_labels;  // one per interval
  std::vector<DualPair> dual_pairs;

  int interior_fixed_count() const;
};

struct MapAnalysisOptions {
  int grid_size = 4096;
  double root_tol = 1e-13;
  double neutral_tol = 1e-8;
  double derivative_step = 1e-6;
};

/// g = f_1 o f_0, the return map of incidence angles at the bottom wall.
double eval_g(const TwistRule& rule, double phi);

/// The same map written as pi - f_0(pi - f_0(phi)), valid under the
/// opposition condition between the two walls.
double eval_g_opposed(const TwistRule& rule, double phi);

/// h = j o f_0 with j(phi) = pi - phi; g = h o h.
double eval_h(const TwistRule& rule, double phi);

/// Central-difference g' in the interior, one-sided second-order at 0 and pi.
double g_derivative_numeric(const TwistRule& rule, double phi, double step = 1e-6);

/// Chain rule f_1'(f_0(phi)) f_0'(phi).
double g_derivative_chain(const TwistRule& rule, double phi);

std::vector<FixedPoint> find_fixed_points(const TwistRule& rule,
                                          const MapAnalysisOptions& opts = {});

/// true when |g(phi) - phi| < tol on every grid point.
bool is_all_fixed(const TwistRule& rule, const MapAnalysisOptions& opts = {});

struct HDecomposition {
  double center = 0.0;
  double residual = 0.0;
};

HDecomposition decompose_h(const TwistRule& rule, int grid_size = 4096,
                           double tol = 1e-13);

enum class PointClass { Fixed, Toward, Away };

/// Which of the three cases holds for a single angle relative to the center.
PointClass classify_point(const TwistRule& rule, double phi, double center,
                          double tol = 1e-12);

std::vector<DualPair> dual_intervals(const TwistRule& rule,
                                     const std::vector<Interval>& intervals,
                                     const std::vector<Movement>& labels);

/// Incidence angles at successive wall hits of a lone particle, starting at
/// the bottom wall: phi_{n+1} = f_{n mod 2}(phi_n), so phi_{2n} = g^n(phi_0).
std::vector<double> one_particle_orbit(const TwistRule& rule, double phi0, int n);

IntervalMapReport analyze_interval_map(const TwistRule& rule,
                                       const MapAnalysisOptions& opts = {});

nlohmann::json to_json(const IntervalMapReport& report);

}  // namespace twistgas

#endif  // TWISTGAS_MAP_ANALYSIS_HPP
