#include "twistgas/regimes.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace twistgas {

std::string to_string(TrapKind kind) {
  switch (kind) {
    case TrapKind::U0: return "U0";
    case TrapKind::Wpm: return "Wpm";
    case TrapKind::SStar: return "SStar";
  }
  return "unknown";
}

std::string to_string(Region region) {
  switch (region) {
    case Region::U0: return "U0";
    case Region::Wplus: return "Wplus";
    case Region::Wminus: return "Wminus";
    case Region::SStar: return "SStar";
  }
  return "unknown";
}

TrapKind parse_trap_kind(const std::string& name) {
  if (name == "U0" || name == "u0") return TrapKind::U0;
  if (name == "Wpm" || name == "wpm" || name == "W") return TrapKind::Wpm;
  if (name == "SStar" || name == "sstar" || name == "S*") return TrapKind::SStar;
  throw std::invalid_argument("unknown trap kind '" + name + "'");
}

void TrapSpec::validate() const {
  if (eps0 && !(*eps0 > 0.0)) throw std::invalid_argument("eps0 must be > 0");
  if (!(tol_momentum > 0.0) || !(tol_center > 0.0)) {
    throw std::invalid_argument("S* tolerances must be > 0");
  }
}

double displacement_bound_s(const PhaseState<double>& state, int i, double lambda) {
  if (!(lambda > 0.0)) {
    throw std::domain_error("displacement bound needs a stable center (lambda > 0)");
  }
  const double u = state.velocities(i, 0);
  const double v = state.velocities(i, 1);
  if (u == 0.0) return 0.0;
  if (v == 0.0) return std::numeric_limits<double>::infinity();
  const double d = state.diameter;
  const double y = state.positions(i, 1);
  const double leg = v > 0.0 ? (1.0 - d / 2) - y : y - d / 2;
  const double slope = std::abs(u / v);
  return slope * (std::max(leg, 0.0) + (1.0 - d) / -std::expm1(-lambda));
}

namespace {

// Returns the smallest margin dist - (d + s_i + s_j) over all pairs.
double u0_margin(const PhaseState<double>& state, double lambda) {
  const auto n = static_cast<int>(state.size());
  double bounds[16];
  std::vector<double> heap;
  double* s = bounds;
  if (n > 16) {
    heap.resize(static_cast<std::size_t>(n));
    s = heap.data();
  }
  for (int i = 0; i < n; ++i) s[i] = displacement_bound_s(state, i, lambda);
  double margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double gap = circular_x_distance(state.positions(i, 0), state.positions(j, 0));
      margin = std::min(margin, gap - (state.diameter + s[i] + s[j]));
    }
  }
  return margin;
}

double wpm_threshold(int n, std::optional<double> eps0) {
  return eps0 ? n - *eps0 : std::sqrt(static_cast<double>(n) * (n - 1));
}

void require_two(const PhaseState<double>& state) {
  if (state.size() != 2) {
    throw std::invalid_argument("S* regime is defined for exactly two disks");
  }
}

}  // namespace

bool is_in_U0(const PhaseState<double>& state, double lambda) {
  return u0_margin(state, lambda) > 0.0;
}

DetectionResult in_U0(const PhaseState<double>& state, double lambda) {
  DetectionResult out;
  const double margin = u0_margin(state, lambda);
  out.trapped = margin > 0.0;
  if (out.trapped) out.which = Region::U0;
  out.diagnostics["margin"] = margin;
  double worst = 0.0;
  for (int i = 0; i < state.size(); ++i) {
    worst = std::max(worst, displacement_bound_s(state, i, lambda));
  }
  out.diagnostics["max_s"] = worst;
  return out;
}

std::optional<Region> wpm_region(const PhaseState<double>& state,
                                 std::optional<double> eps0) {
  const double total = horizontal_momentum(state);
  const double threshold = wpm_threshold(static_cast<int>(state.size()), eps0);
  if (total > threshold) return Region::Wplus;
  if (-total > threshold) return Region::Wminus;
  return std::nullopt;
}

DetectionResult in_Wpm(const PhaseState<double>& state, std::optional<double> eps0) {
  DetectionResult out;
  out.which = wpm_region(state, eps0);
  out.trapped = out.which.has_value();
  const double total = horizontal_momentum(state);
  const double threshold = wpm_threshold(static_cast<int>(state.size()), eps0);
  out.diagnostics["momentum"] = total;
  out.diagnostics["margin"] = std::abs(total) - threshold;
  double min_u = std::numeric_limits<double>::infinity();
  double max_u = -min_u;
  for (int i = 0; i < state.size(); ++i) {
    min_u = std::min(min_u, state.velocities(i, 0));
    max_u = std::max(max_u, state.velocities(i, 0));
  }
  out.diagnostics["min_u"] = min_u;
  out.diagnostics["max_u"] = max_u;
  return out;
}

Vec2<double> contact_point(const PhaseState<double>& state, int i, int j) {
  Vec2<double> delta = state.position(j) - state.position(i);
  if (delta.x() > 0.5) delta.x() -= 1.0;
  if (delta.x() < -0.5) delta.x() += 1.0;
  Vec2<double> mid = state.position(i) + 0.5 * delta;
  mid.x() = wrap_unit(mid.x());
  return mid;
}

SStarDeviation sstar_deviation(const PhaseState<double>& state,
                               const Vec2<double>& contact) {
  require_two(state);
  return {(state.velocity(0) + state.velocity(1)).norm(), contact.y() - 0.5};
}

bool is_in_sstar(const PhaseState<double>& state, const TrapSpec& spec) {
  require_two(state);
  const double momentum = (state.velocity(0) + state.velocity(1)).norm();
  const double center = std::abs(state.positions(0, 1) + state.positions(1, 1) - 1.0);
  return momentum < spec.tol_momentum && center < spec.tol_center;
}

DetectionResult in_sstar(const PhaseState<double>& state, const TrapSpec& spec) {
  DetectionResult out;
  out.trapped = is_in_sstar(state, spec);
  if (out.trapped) out.which = Region::SStar;
  out.diagnostics["dv_norm"] = (state.velocity(0) + state.velocity(1)).norm();
  out.diagnostics["center_offset"] =
      state.positions(0, 1) + state.positions(1, 1) - 1.0;
  return out;
}

bool is_trapped(const PhaseState<double>& state, const TrapSpec& trap,
                const TwistRule& rule) {
  switch (trap.kind) {
    case TrapKind::U0: return is_in_U0(state, rule.lambda);
    case TrapKind::Wpm: return wpm_region(state, trap.eps0).has_value();
    case TrapKind::SStar: return is_in_sstar(state, trap);
  }
  return false;
}

DetectionResult detect(const PhaseState<double>& state, const TrapSpec& trap,
                       const TwistRule& rule) {
  switch (trap.kind) {
    case TrapKind::U0: return in_U0(state, rule.lambda);
    case TrapKind::Wpm: return in_Wpm(state, trap.eps0);
    case TrapKind::SStar: return in_sstar(state, trap);
  }
  return {};
}

void check_trap_consistency(const TrapSpec& trap, const TwistRule& rule, int n_disks) {
  trap.validate();
  switch (trap.kind) {
    case TrapKind::U0:
      if (rule.family != Family::TanCenter || !(rule.lambda > 0.0)) {
        throw std::invalid_argument("U0 trap requires tan-center with lambda > 0");
      }
      break;
    case TrapKind::Wpm:
      if (rule.family != Family::TanCenter || !(rule.lambda < 0.0)) {
        throw std::invalid_argument("Wpm trap requires tan-center with lambda < 0");
      }
      break;
    case TrapKind::SStar:
      if (rule.family != Family::ReversibleShear) {
        throw std::invalid_argument("S* trap requires the reversible-shear family");
      }
      if (n_disks != 2) throw std::invalid_argument("S* trap requires two disks");
      break;
  }
}

}  // namespace twistgas
