#ifndef TWISTGAS_ENGINE_HPP
#define TWISTGAS_ENGINE_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "twistgas/core.hpp"
#include "twistgas/twist.hpp"

namespace twistgas {

enum class EventKind { DiskWall, DiskDisk };

template <typename Scalar>
struct Event {
  EventKind kind = EventKind::DiskWall;
  int i = 0;
  int j = -1;                // DiskDisk only
  Wall wall = Wall::Bottom;  // DiskWall only
  Scalar time{0};            // absolute
};

template <typename Scalar>
struct WallHit {
  Scalar delay{0};
  Wall wall = Wall::Bottom;
  bool immediate = false;
};

template <typename Scalar>
struct PairHit {
  Scalar delay{0};
};

template <typename Scalar>
struct WallAngles {
  Scalar phi{0};  // incidence
  Scalar psi{0};  // reflection
};

/// Record of one application of the collision map. The post-event state is
/// the state the step was applied to.
template <typename Scalar>
struct StepOutcome {
  bool frozen = false;
  Event<Scalar> event{};
  Vec2<Scalar> before_i = Vec2<Scalar>::Zero();
  Vec2<Scalar> after_i = Vec2<Scalar>::Zero();
  Vec2<Scalar> before_j = Vec2<Scalar>::Zero();
  Vec2<Scalar> after_j = Vec2<Scalar>::Zero();
  std::optional<WallAngles<Scalar>> wall_angles;
};

enum class StopReason { Trapped, Frozen, Budget };

inline std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::Trapped: return "trapped";
    case StopReason::Frozen: return "frozen";
    case StopReason::Budget: return "budget";
  }
  return "unknown";
}

struct RunResult {
  std::uint64_t n_events = 0;
  StopReason reason = StopReason::Budget;
};

template <typename Scalar>
std::optional<WallHit<Scalar>> next_wall_event(const PhaseState<Scalar>& state,
                                               Eigen::Index i) {
  const Scalar half = state.diameter / Scalar(2);
  const Scalar y = state.positions(i, 1);
  const Scalar v = state.velocities(i, 1);
  if (v > Scalar(0)) {
    const Scalar gap = Scalar(1) - half - y;
    if (gap <= Scalar(0)) return WallHit<Scalar>{Scalar(0), Wall::Top, true};
    return WallHit<Scalar>{gap / v, Wall::Top, false};
  }
  if (v < Scalar(0)) {
    const Scalar gap = y - half;
    if (gap <= Scalar(0)) return WallHit<Scalar>{Scalar(0), Wall::Bottom, true};
    return WallHit<Scalar>{gap / -v, Wall::Bottom, false};
  }
  return std::nullopt;
}

/// Earliest contact time of disks i and j over all periodic x-images of j.
/// Between two events a nearly horizontal pair can wrap around the channel
/// many times, so the image is found analytically: image m is hit only if the
/// relative line passes within d of it, and among those the earliest one is
/// the image with the smallest time of closest approach. Roots whose
/// discriminant lies within tol.root (relative to a d^2) of zero are grazing
/// and ignored; already-touching approaching disks collide immediately.
template <typename Scalar>
std::optional<PairHit<Scalar>> next_pair_event(const PhaseState<Scalar>& state,
                                               Eigen::Index i, Eigen::Index j,
                                               const ToleranceSet& tol) {
  using std::abs;
  using std::ceil;
  using std::floor;
  using std::round;
  using std::sqrt;
  const Vec2<Scalar> dq = state.position(j) - state.position(i);
  const Vec2<Scalar> dp = state.velocity(j) - state.velocity(i);
  const Scalar a = dp.squaredNorm();
  if (a == Scalar(0)) return std::nullopt;
  const Scalar d = state.diameter;
  const Scalar d2 = d * d;
  const Scalar speed = sqrt(a);

  std::optional<PairHit<Scalar>> best;
  const auto try_image = [&](Scalar m) {
    const Scalar dx = dq.x() + m;
    const Scalar b = dx * dp.x() + dq.y() * dp.y();
    if (b >= Scalar(0)) return;
    const Scalar c = dx * dx + dq.y() * dq.y() - d2;
    Scalar delay;
    if (c <= Scalar(0)) {
      delay = Scalar(0);
    } else {
      const Scalar disc = b * b - a * c;
      if (disc <= Scalar(tol.root) * a * d2) return;
      delay = c / (-b + sqrt(disc));
    }
    if (!best || delay < best->delay) best = PairHit<Scalar>{delay};
  };

  if (dp.x() == Scalar(0)) {
    // x-separation is frozen; only the nearest image can ever touch.
    try_image(-round(dq.x()));
    return best;
  }

  // Perpendicular distance from image m to the relative line is
  // |cross - dv m| / speed with cross = du dy - dv dx.
  const Scalar cross = dp.x() * dq.y() - dp.y() * dq.x();
  const Scalar reach = d * speed;
  Scalar lo, hi;
  if (dp.y() == Scalar(0)) {
    if (abs(cross) >= reach) return std::nullopt;
    lo = -std::numeric_limits<Scalar>::infinity();
    hi = std::numeric_limits<Scalar>::infinity();
  } else {
    const Scalar e1 = (cross - reach) / dp.y();
    const Scalar e2 = (cross + reach) / dp.y();
    lo = ceil(e1 < e2 ? e1 : e2);
    hi = floor(e1 < e2 ? e2 : e1);
  }
  // Approaching images have b_m = (dx + m) du + dy dv < 0. The time of
  // closest approach -b_m / a shrinks as m moves toward the b = 0 boundary,
  // so images are visited from that boundary outward.
  const Scalar boundary = -(dq.y() * dp.y()) / dp.x() - dq.x();
  const Scalar spacing = abs(dp.x()) / a;
  const Scalar chord = d / speed;
  if (dp.x() > Scalar(0)) {
    Scalar m = floor(boundary);
    if (m > hi) m = hi;
    for (int visited = 0; m >= lo && visited < 1 << 20; ++visited, m -= Scalar(1)) {
      try_image(m);
      const Scalar tau = -((dq.x() + m) * dp.x() + dq.y() * dp.y()) / a;
      if (best && tau + spacing - chord > best->delay) break;
    }
  } else {
    Scalar m = ceil(boundary);
    if (m < lo) m = lo;
    for (int visited = 0; m <= hi && visited < 1 << 20; ++visited, m += Scalar(1)) {
      try_image(m);
      const Scalar tau = -((dq.x() + m) * dp.x() + dq.y() * dp.y()) / a;
      if (best && tau + spacing - chord > best->delay) break;
    }
  }
  return best;
}

template <typename Scalar>
Scalar max_speed(const PhaseState<Scalar>& state) {
  using std::sqrt;
  return sqrt(state.velocities.rowwise().squaredNorm().maxCoeff());
}

/// Longest flight whose endpoint is still resolved to tol.overlap in Scalar,
/// with a factor 64 for the rounding in the event time and the wrap.
/// A state whose next event lies further out has reached its limiting
/// regime as far as this precision can tell, and is reported as frozen.
template <typename Scalar>
Scalar flight_horizon(const ToleranceSet& tol) {
  return Scalar(tol.overlap) / (Scalar(64) * std::numeric_limits<Scalar>::epsilon());
}

/// Next event by smallest time; events within tol.event_tie of the minimum
/// are ordered wall before pair, then by lowest disk index.
template <typename Scalar>
std::optional<Event<Scalar>> find_next_event(const PhaseState<Scalar>& state,
                                             const ToleranceSet& tol,
                                             std::vector<Event<Scalar>>& scratch) {
  scratch.clear();
  const auto n = state.size();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (auto hit = next_wall_event(state, i)) {
      Event<Scalar> e;
      e.kind = EventKind::DiskWall;
      e.i = static_cast<int>(i);
      e.wall = hit->wall;
      e.time = hit->delay;
      scratch.push_back(e);
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (auto hit = next_pair_event(state, i, j, tol)) {
        Event<Scalar> e;
        e.kind = EventKind::DiskDisk;
        e.i = static_cast<int>(i);
        e.j = static_cast<int>(j);
        e.time = hit->delay;
        scratch.push_back(e);
      }
    }
  }
  if (scratch.empty()) return std::nullopt;
  Scalar earliest = scratch.front().time;
  for (const auto& e : scratch) {
    if (e.time < earliest) earliest = e.time;
  }
  if (earliest * max_speed(state) > flight_horizon<Scalar>(tol)) return std::nullopt;
  const Scalar cutoff = earliest + Scalar(tol.event_tie);
  for (auto e : scratch) {
    if (e.time <= cutoff) {
      e.time = state.time + e.time;
      return e;
    }
  }
  return std::nullopt;
}

template <typename Scalar>
std::optional<Event<Scalar>> find_next_event(const PhaseState<Scalar>& state,
                                             const ToleranceSet& tol) {
  std::vector<Event<Scalar>> scratch;
  return find_next_event(state, tol, scratch);
}

/// Ballistic flight by dt; x is re-wrapped to [0, 1).
template <typename Scalar>
void advance(PhaseState<Scalar>& state, Scalar dt) {
  if (dt > Scalar(0)) {
    state.positions += dt * state.velocities;
    for (Eigen::Index i = 0; i < state.size(); ++i) {
      state.positions(i, 0) = wrap_unit(state.positions(i, 0));
    }
  }
  state.time += dt;
}

/// Equal-mass elastic collision of touching disks i and j, using the nearest
/// x-image of j. Afterwards the center gap is reset to exactly d.
template <typename Scalar>
void resolve_disk_disk(PhaseState<Scalar>& state, Eigen::Index i,
                       Eigen::Index j, const ToleranceSet& tol) {
  using std::abs;
  using std::sqrt;
  const Scalar d = state.diameter;
  Vec2<Scalar> dq = state.position(j) - state.position(i);
  if (dq.x() > Scalar(0.5)) dq.x() -= Scalar(1);
  if (dq.x() < Scalar(-0.5)) dq.x() += Scalar(1);
  const Scalar dist = dq.norm();
  if (abs(dist - d) > Scalar(tol.root) + Scalar(tol.overlap)) {
    throw ContractViolation("resolve_disk_disk: disks are not in contact");
  }
  const Vec2<Scalar> normal = dq / dist;
  const Vec2<Scalar> dp = state.velocity(j) - state.velocity(i);
  const Scalar approach = dp.dot(normal);
  if (approach > Scalar(0)) {
    throw ContractViolation("resolve_disk_disk: disks are receding");
  }
  const Vec2<Scalar> impulse = approach * normal;
  state.velocities.row(i) += impulse.transpose();
  state.velocities.row(j) -= impulse.transpose();

  const Scalar shift = (d - dist) / Scalar(2);
  const Scalar half = d / Scalar(2);
  const Scalar top = Scalar(1) - half;
  for (auto [k, sign] : {std::pair{i, Scalar(-1)}, std::pair{j, Scalar(1)}}) {
    state.positions(k, 0) = wrap_unit(state.positions(k, 0) + sign * shift * normal.x());
    Scalar y = state.positions(k, 1) + sign * shift * normal.y();
    if (y < half) y = half;
    if (y > top) y = top;
    state.positions(k, 1) = y;
  }
}

/// Applies the wall law to disk i sitting on the contact line of wall k.
template <typename Scalar>
WallAngles<Scalar> resolve_wall(PhaseState<Scalar>& state, Eigen::Index i,
                                Wall k, const TwistRule& rule,
                                const ToleranceSet& tol) {
  using std::abs;
  const Scalar half = state.diameter / Scalar(2);
  const Scalar contact = k == Wall::Bottom ? half : Scalar(1) - half;
  if (abs(state.positions(i, 1) - contact) > Scalar(tol.overlap)) {
    throw ContractViolation("resolve_wall: disk is not on the wall contact line");
  }
  state.positions(i, 1) = contact;
  const Vec2<Scalar> before = state.velocity(i);
  const Vec2<Scalar> after = apply_twist_velocity(rule, k, before);
  state.velocities.row(i) = after.transpose();
  return {incidence_angle(before), incidence_angle(after)};
}

/// One application of the collision map: flight to the next event, then its
/// resolution. Returns a frozen outcome when no event will ever occur, or
/// none within flight_horizon.
template <typename Scalar>
StepOutcome<Scalar> step(PhaseState<Scalar>& state, const TwistRule& rule,
                         const ToleranceSet& tol,
                         std::vector<Event<Scalar>>& scratch) {
  StepOutcome<Scalar> out;
  const auto next = find_next_event(state, tol, scratch);
  if (!next) {
    out.frozen = true;
    return out;
  }
  out.event = *next;
  advance(state, next->time - state.time);
  state.time = next->time;
  out.before_i = state.velocity(next->i);
  if (next->kind == EventKind::DiskWall) {
    out.wall_angles = resolve_wall(state, next->i, next->wall, rule, tol);
  } else {
    out.before_j = state.velocity(next->j);
    resolve_disk_disk(state, next->i, next->j, tol);
    out.after_j = state.velocity(next->j);
  }
  out.after_i = state.velocity(next->i);
  ++state.collisions;
  return out;
}

template <typename Scalar>
StepOutcome<Scalar> step(PhaseState<Scalar>& state, const TwistRule& rule,
                         const ToleranceSet& tol = {}) {
  std::vector<Event<Scalar>> scratch;
  return step(state, rule, tol, scratch);
}

/// Steps until `stop(state, outcome)` fires, the system freezes, or
/// max_events steps have been taken. `observe(state, outcome)` sees every
/// step before the stop test.
template <typename Scalar, typename Stop, typename Observe>
RunResult run_until(PhaseState<Scalar>& state, const TwistRule& rule,
                    Stop&& stop, std::uint64_t max_events,
                    const ToleranceSet& tol, Observe&& observe) {
  std::vector<Event<Scalar>> scratch;
  scratch.reserve(static_cast<std::size_t>(state.size() * (state.size() + 1) / 2));
  RunResult result;
  while (result.n_events < max_events) {
    const auto out = step(state, rule, tol, scratch);
    if (out.frozen) {
      result.reason = StopReason::Frozen;
      return result;
    }
    ++result.n_events;
    observe(std::as_const(state), out);
    if (stop(std::as_const(state), out)) {
      result.reason = StopReason::Trapped;
      return result;
    }
  }
  result.reason = StopReason::Budget;
  return result;
}

template <typename Scalar, typename Stop>
RunResult run_until(PhaseState<Scalar>& state, const TwistRule& rule,
                    Stop&& stop, std::uint64_t max_events,
                    const ToleranceSet& tol = {}) {
  return run_until(state, rule, std::forward<Stop>(stop), max_events, tol,
                   [](const PhaseState<Scalar>&, const StepOutcome<Scalar>&) {});
}

template <typename Scalar>
void reverse_velocities(PhaseState<Scalar>& state) {
  state.velocities = -state.velocities;
}

template <typename Scalar>
PhaseState<Scalar> reversed(PhaseState<Scalar> state) {
  reverse_velocities(state);
  return state;
}

/// Runs n events forward under `rule`, reverses all velocities, undoes the n
/// events under the time-reversed rule plus the free flight back to the
/// starting instant, and reverses again. For a reversible collision law the
/// result coincides with the starting state.
template <typename Scalar>
PhaseState<Scalar> reversal_roundtrip(PhaseState<Scalar> state,
                                      const TwistRule& rule, std::uint64_t n,
                                      const ToleranceSet& tol = {}) {
  const auto never = [](const PhaseState<Scalar>&, const StepOutcome<Scalar>&) {
    return false;
  };
  const Scalar start = state.time;
  run_until(state, rule, never, n, tol);
  const Scalar forward = state.time - start;
  reverse_velocities(state);
  const Scalar turn = state.time;
  run_until(state, time_reversal_rule(rule), never, n, tol);
  advance(state, forward - (state.time - turn));
  reverse_velocities(state);
  return state;
}

/// Max-norm distance between two states, with x compared on the circle.
template <typename Scalar>
Scalar state_distance(const PhaseState<Scalar>& a, const PhaseState<Scalar>& b) {
  using std::abs;
  Scalar worst(0);
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const Scalar candidates[] = {
        circular_x_distance(a.positions(i, 0), b.positions(i, 0)),
        abs(a.positions(i, 1) - b.positions(i, 1)),
        abs(a.velocities(i, 0) - b.velocities(i, 0)),
        abs(a.velocities(i, 1) - b.velocities(i, 1))};
    for (const auto& c : candidates) {
      if (c > worst) worst = c;
    }
  }
  return worst;
}

}  // namespace twistgas

#endif  // TWISTGAS_ENGINE_HPP
