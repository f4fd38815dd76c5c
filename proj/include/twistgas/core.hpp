#ifndef TWISTGAS_CORE_HPP
#define TWISTGAS_CORE_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include "twistgas/twist.hpp"
#include "twistgas/types.hpp"

namespace twistgas {

using Rng = std::mt19937_64;

struct ToleranceSet {
  double energy = 1e-9;
  double overlap = 1e-9;
  double event_tie = 1e-13;
  double root = 1e-12;

  void validate() const {
    if (!(energy > 0 && overlap > 0 && event_tie > 0 && root > 0)) {
      throw std::invalid_argument("all tolerances must be strictly positive");
    }
  }
};

/// State of N hard disks in the unit channel: rigid walls at y = 0 and
/// y = 1, periodic in x. Positions are stored wrapped to [0, 1).
template <typename Scalar>
struct PhaseState {
  Points<Scalar> positions;
  Points<Scalar> velocities;
  Scalar diameter{0};
  Scalar time{0};
  std::uint64_t collisions = 0;

  PhaseState() = default;
  PhaseState(Eigen::Index n, Scalar d)
      : positions(Points<Scalar>::Zero(n, 2)),
        velocities(Points<Scalar>::Zero(n, 2)),
        diameter(d) {}

  Eigen::Index size() const { return positions.rows(); }
  Vec2<Scalar> position(Eigen::Index i) const {
    return positions.row(i).transpose();
  }
  Vec2<Scalar> velocity(Eigen::Index i) const {
    return velocities.row(i).transpose();
  }

  template <typename Other>
  PhaseState<Other> cast() const {
    PhaseState<Other> out;
    out.positions = positions.template cast<Other>();
    out.velocities = velocities.template cast<Other>();
    out.diameter = Other(diameter);
    out.time = Other(time);
    out.collisions = collisions;
    return out;
  }
};

struct SimParams {
  int n_disks = 2;
  double diameter = 0.1;
  TwistRule rule{};
  std::uint64_t max_events = 1'000'000;
  std::uint64_t seed = 0;
  ToleranceSet tolerances{};

  void validate() const {
    if (n_disks < 1) throw std::invalid_argument("n_disks must be >= 1");
    if (!(diameter > 0.0) || !(diameter * n_disks < 1.0)) {
      throw std::invalid_argument("diameter must satisfy 0 < d < 1/N");
    }
    if (max_events == 0) throw std::invalid_argument("max_events must be > 0");
    tolerances.validate();
  }
};

template <typename Scalar>
Scalar kinetic_energy(const PhaseState<Scalar>& state) {
  return Scalar(0.5) * state.velocities.squaredNorm();
}

template <typename Scalar>
Scalar horizontal_momentum(const PhaseState<Scalar>& state) {
  return state.velocities.col(0).sum();
}

/// Distance between two x coordinates on the unit circle, in [0, 0.5].
template <typename Scalar>
Scalar circular_x_distance(Scalar a, Scalar b) {
  using std::abs;
  const Scalar delta = abs(a - b);
  return delta < Scalar(1) - delta ? delta : Scalar(1) - delta;
}

template <typename Scalar>
Scalar wrap_unit(Scalar x) {
  using std::floor;
  x -= floor(x);
  return x >= Scalar(1) ? Scalar(0) : x;
}

/// Center distance between disks i and j over the x-images {-1, 0, +1}.
template <typename Scalar>
Scalar pair_distance(const PhaseState<Scalar>& state, Eigen::Index i,
                     Eigen::Index j) {
  using std::sqrt;
  const Vec2<Scalar> delta = state.position(j) - state.position(i);
  Scalar best = std::numeric_limits<Scalar>::infinity();
  for (int image = -1; image <= 1; ++image) {
    const Scalar dx = delta.x() + Scalar(image);
    const Scalar dist = sqrt(dx * dx + delta.y() * delta.y());
    if (dist < best) best = dist;
  }
  return best;
}

/// Checks every PhaseState invariant; returns an empty string when valid.
template <typename Scalar>
std::string validate_state(const PhaseState<Scalar>& state,
                           const ToleranceSet& tol) {
  const Scalar d = state.diameter;
  const Scalar half = d / Scalar(2);
  const auto n = state.size();
  if (state.velocities.rows() != n) return "positions/velocities size mismatch";
  if (!state.positions.allFinite() || !state.velocities.allFinite()) {
    return "non-finite component";
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const Scalar x = state.positions(i, 0);
    const Scalar y = state.positions(i, 1);
    if (x < Scalar(0) || x >= Scalar(1)) return "x outside [0,1)";
    if (y < half - Scalar(tol.overlap) || y > Scalar(1) - half + Scalar(tol.overlap)) {
      return "y outside wall clearance";
    }
    for (Eigen::Index j = i + 1; j < n; ++j) {
      if (pair_distance(state, i, j) < d - Scalar(tol.overlap)) return "disks overlap";
    }
  }
  using std::abs;
  if (abs(kinetic_energy(state) - Scalar(n) / Scalar(2)) > Scalar(tol.energy)) {
    return "kinetic energy differs from N/2";
  }
  return {};
}

/// Positions uniform over the admissible (non-overlapping) region by
/// whole-configuration rejection; velocities uniform on the sphere of total
/// kinetic energy N/2.
inline PhaseState<double> sample_initial_state(const SimParams& params, Rng& rng,
                                               int max_attempts = 1'000'000) {
  params.validate();
  const int n = params.n_disks;
  const double d = params.diameter;
  PhaseState<double> state(n, d);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> height(d / 2, 1.0 - d / 2);

  bool placed = false;
  for (int attempt = 0; attempt < max_attempts && !placed; ++attempt) {
    for (int i = 0; i < n; ++i) {
      state.positions(i, 0) = wrap_unit(unit(rng));
      state.positions(i, 1) = height(rng);
    }
    placed = true;
    for (int i = 0; i < n && placed; ++i) {
      for (int j = i + 1; j < n && placed; ++j) {
        placed = pair_distance(state, i, j) > d;
      }
    }
  }
  if (!placed) {
    throw SamplingError("rejection sampling failed after " +
                        std::to_string(max_attempts) +
                        " attempts; packing too dense");
  }

  std::normal_distribution<double> gauss(0.0, 1.0);
  double norm = 0.0;
  do {
    for (int i = 0; i < n; ++i) {
      state.velocities(i, 0) = gauss(rng);
      state.velocities(i, 1) = gauss(rng);
    }
    norm = state.velocities.norm();
  } while (!(norm > 1e-12));
  state.velocities *= std::sqrt(static_cast<double>(n)) / norm;
  return state;
}

}  // namespace twistgas

#endif  // TWISTGAS_CORE_HPP
