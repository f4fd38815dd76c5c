#include "twistgas/map_analysis.hpp"

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace twistgas {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

double clamp_angle(double phi) { return std::clamp(phi, 0.0, kPi); }

double bisect(const auto& fn, double lo, double hi, double tol) {
  double flo = fn(lo);
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double fmid = fn(mid);
    if (fmid == 0.0) return mid;
    if ((fmid < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fmid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double grid_point(int i, int grid_size) {
  return i == grid_size - 1 ? kPi : kPi * i / (grid_size - 1);
}

Stability classify_derivative(double slope, double neutral_tol) {
  if (std::abs(slope - 1.0) < neutral_tol) return Stability::Neutral;
  return std::abs(slope) < 1.0 ? Stability::Stable : Stability::Unstable;
}

}  // namespace

std::string to_string(Stability s) {
  switch (s) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Neutral: return "neutral";
  }
  return "unknown";
}

std::string to_string(Movement m) {
  return m == Movement::Toward ? "toward" : "away";
}

int IntervalMapReport::interior_fixed_count() const {
  return static_cast<int>(std::count_if(
      fixed_points.begin(), fixed_points.end(),
      [](const FixedPoint& p) { return p.phi > 0.0 && p.phi < kPi; }));
}

double eval_g(const TwistRule& rule, double phi) {
  const double first = apply_f(rule, Wall::Bottom, phi);
  return apply_f(rule, Wall::Top, first);
}

double eval_g_opposed(const TwistRule& rule, double phi) {
  const double inner = apply_f(rule, Wall::Bottom, phi);
  return kPi - apply_f(rule, Wall::Bottom, clamp_angle(kPi - inner));
}

double eval_h(const TwistRule& rule, double phi) {
  return clamp_angle(kPi - apply_f(rule, Wall::Bottom, phi));
}

double g_derivative_numeric(const TwistRule& rule, double phi, double step) {
  if (phi - step < 0.0) {
    return (-3.0 * eval_g(rule, phi) + 4.0 * eval_g(rule, phi + step) -
            eval_g(rule, phi + 2 * step)) / (2 * step);
  }
  if (phi + step > kPi) {
    return (3.0 * eval_g(rule, phi) - 4.0 * eval_g(rule, phi - step) +
            eval_g(rule, phi - 2 * step)) / (2 * step);
  }
  return (eval_g(rule, phi + step) - eval_g(rule, phi - step)) / (2 * step);
}

double g_derivative_chain(const TwistRule& rule, double phi) {
  const double first = apply_f(rule, Wall::Bottom, phi);
  return f_derivative(rule, Wall::Top, first) * f_derivative(rule, Wall::Bottom, phi);
}

bool is_all_fixed(const TwistRule& rule, const MapAnalysisOptions& opts) {
  for (int i = 0; i < opts.grid_size; ++i) {
    const double phi = grid_point(i, opts.grid_size);
    if (std::abs(eval_g(rule, phi) - phi) >= opts.root_tol) return false;
  }
  return true;
}

std::vector<FixedPoint> find_fixed_points(const TwistRule& rule,
                                          const MapAnalysisOptions& opts) {
  if (opts.grid_size < 3) throw std::invalid_argument("grid_size must be >= 3");
  const auto residual = [&](double phi) { return eval_g(rule, phi) - phi; };
  const auto make = [&](double phi) {
    FixedPoint p;
    p.phi = phi;
    p.derivative = g_derivative_numeric(rule, phi, opts.derivative_step);
    p.stability = classify_derivative(p.derivative, opts.neutral_tol);
    return p;
  };

  std::vector<FixedPoint> points{make(0.0)};
  if (!is_all_fixed(rule, opts)) {
    double prev_phi = grid_point(1, opts.grid_size);
    double prev = residual(prev_phi);
    if (std::abs(prev) < opts.root_tol) points.push_back(make(prev_phi));
    for (int i = 2; i < opts.grid_size - 1; ++i) {
      const double phi = grid_point(i, opts.grid_size);
      const double r = residual(phi);
      if (std::abs(r) < opts.root_tol) {
        if (std::abs(prev) >= opts.root_tol) points.push_back(make(phi));
      } else if (std::abs(prev) >= opts.root_tol && (r < 0.0) != (prev < 0.0)) {
        points.push_back(make(bisect(residual, prev_phi, phi, opts.root_tol)));
      }
      prev_phi = phi;
      prev = r;
    }
  }
  points.push_back(make(kPi));

  const double center = decompose_h(rule, opts.grid_size, opts.root_tol).center;
  for (auto& p : points) p.is_center = std::abs(p.phi - center) < 1e-9;
  return points;
}

HDecomposition decompose_h(const TwistRule& rule, int grid_size, double tol) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  // h is orientation reversing, so h(phi) - phi falls from pi to -pi.
  HDecomposition out;
  out.center = bisect([&](double phi) { return eval_h(rule, phi) - phi; }, 0.0,
                      kPi, tol);
  for (int i = 0; i < grid_size; ++i) {
    const double phi = grid_point(i, grid_size);
    const double hh = eval_h(rule, eval_h(rule, phi));
    out.residual = std::max(out.residual, std::abs(eval_g(rule, phi) - hh));
  }
  return out;
}

PointClass classify_point(const TwistRule& rule, double phi, double center,
                          double tol) {
  const double image = eval_g(rule, phi);
  if (std::abs(image - phi) < tol) return PointClass::Fixed;
  return std::abs(image - center) < std::abs(phi - center) ? PointClass::Toward
                                                           : PointClass::Away;
}

std::vector<DualPair> dual_intervals(const TwistRule& rule,
                                     const std::vector<Interval>& intervals,
                                     const std::vector<Movement>& labels) {
  std::vector<DualPair> pairs;
  std::vector<bool> used(intervals.size(), false);
  for (std::size_t m = 0; m < intervals.size(); ++m) {
    if (used[m]) continue;
    const double image = eval_h(rule, intervals[m].mid());
    for (std::size_t k = 0; k < intervals.size(); ++k) {
      if (k != m && !used[k] && intervals[k].contains(image)) {
        used[m] = used[k] = true;
        pairs.push_back({intervals[m], intervals[k], labels[m]});
        break;
      }
    }
  }
  return pairs;
}

std::vector<double> one_particle_orbit(const TwistRule& rule, double phi0, int n) {
  if (!(phi0 > 0.0 && phi0 < kPi)) {
    throw std::domain_error("orbit start must lie in (0, pi)");
  }
  std::vector<double> orbit;
  orbit.reserve(static_cast<std::size_t>(n) + 1);
  orbit.push_back(phi0);
  for (int k = 0; k < n; ++k) {
    const Wall wall = k % 2 == 0 ? Wall::Bottom : Wall::Top;
    orbit.push_back(apply_f(rule, wall, orbit.back()));
  }
  return orbit;
}

IntervalMapReport analyze_interval_map(const TwistRule& rule,
                                       const MapAnalysisOptions& opts) {
  IntervalMapReport report;
  report.rule = rule;
  report.all_fixed = is_all_fixed(rule, opts);
  const auto h = decompose_h(rule, opts.grid_size, opts.root_tol);
  report.center = h.center;
  report.h_decomposition_residual = h.residual;
  report.fixed_points = find_fixed_points(rule, opts);
  if (report.all_fixed) return report;

  for (std::size_t k = 0; k + 1 < report.fixed_points.size(); ++k) {
    Interval iv{report.fixed_points[k].phi, report.fixed_points[k + 1].phi};
    report.intervals.push_back(iv);
    const auto cls = classify_point(rule, iv.mid(), report.center);
    report.trichotomy_labels.push_back(cls == PointClass::Toward ? Movement::Toward
                                                                 : Movement::Away);
  }
  report.dual_pairs = dual_intervals(rule, report.intervals, report.trichotomy_labels);
  return report;
}

nlohmann::json to_json(const IntervalMapReport& report) {
  using nlohmann::json;
  json j;
  j["schema"] = "twistgas.map_report/1";
  j["rule"] = {{"family", to_string(report.rule.family)},
               {"lambda", report.rule.effective_lambda()}};
  j["all_fixed"] = report.all_fixed;
  j["center"] = report.center;
  j["h_decomposition_residual"] = report.h_decomposition_residual;
  j["fixed_points"] = json::array();
  for (const auto& p : report.fixed_points) {
    j["fixed_points"].push_back({{"phi", p.phi},
                                 {"stability", to_string(p.stability)},
                                 {"is_center", p.is_center},
                                 {"derivative", p.derivative}});
  }
  j["intervals"] = json::array();
  for (std::size_t k = 0; k < report.intervals.size(); ++k) {
    j["intervals"].push_back({{"lo", report.intervals[k].lo},
                              {"hi", report.intervals[k].hi},
                              {"movement", to_string(report.trichotomy_labels[k])}});
  }
  j["dual_pairs"] = json::array();
  for (const auto& pair : report.dual_pairs) {
    j["dual_pairs"].push_back({{"first", {pair.first.lo, pair.first.hi}},
                               {"second", {pair.second.lo, pair.second.hi}},
                               {"movement", to_string(pair.movement)}});
  }
  return j;
}

}  // namespace twistgas
