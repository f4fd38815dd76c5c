#ifndef TWISTGAS_TWIST_HPP
#define TWISTGAS_TWIST_HPP

#include <boost/math/constants/constants.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

#include "twistgas/types.hpp"

namespace twistgas {

enum class Family { Specular, TanCenter, ReversibleShear };

/// Bottom wall y = 0 is k = 0, top wall y = 1 is k = 1.
enum class Wall : int { Bottom = 0, Top = 1 };

inline int index(Wall k) { return static_cast<int>(k); }
inline Wall wall_from_index(int k) {
  if (k != 0 && k != 1) throw std::invalid_argument("wall index must be 0 or 1");
  return static_cast<Wall>(k);
}

/// Wall reflection law psi = f_k(phi). Angles are measured from the +x axis,
/// so an incoming velocity (u, v) of speed s has u = s cos(phi) and
/// |v| = s sin(phi), and the outgoing one has u' = s cos(psi).
///
///   TanCenter:        tan f_k(phi) = e^lambda tan(phi)       (both walls)
///   ReversibleShear:  cot f_k(phi) = (-1)^k lambda + cot(phi)
struct TwistRule {
  Family family = Family::Specular;
  double lambda = 0.0;

  static TwistRule specular() { return {Family::Specular, 0.0}; }
  static TwistRule tan_center(double lambda) { return {Family::TanCenter, lambda}; }
  static TwistRule reversible_shear(double lambda) {
    return {Family::ReversibleShear, lambda};
  }

  double effective_lambda() const {
    return family == Family::Specular ? 0.0 : lambda;
  }

  friend bool operator==(const TwistRule& a, const TwistRule& b) {
    return a.family == b.family && a.effective_lambda() == b.effective_lambda();
  }
};

inline std::string to_string(Family family) {
  switch (family) {
    case Family::Specular: return "specular";
    case Family::TanCenter: return "tan-center";
    case Family::ReversibleShear: return "reversible-shear";
  }
  return "unknown";
}

inline Family parse_family(std::string_view name) {
  if (name == "specular") return Family::Specular;
  if (name == "tan-center" || name == "tan" || name == "tan_center") {
    return Family::TanCenter;
  }
  if (name == "reversible-shear" || name == "reversible" ||
      name == "reversible_shear") {
    return Family::ReversibleShear;
  }
  throw std::invalid_argument("unknown twist family '" + std::string(name) + "'");
}

namespace detail {

// Both families have the form f(phi) = atan2(a sin(phi), cos(phi) + b sin(phi)),
// hence f'(phi) = a / ((cos + b sin)^2 + (a sin)^2).
template <typename Scalar>
struct WallLaw {
  Scalar a{1};
  Scalar b{0};
};

template <typename Scalar>
WallLaw<Scalar> wall_law(const TwistRule& rule, Wall k) {
  using std::exp;
  const Scalar lambda(rule.lambda);
  switch (rule.family) {
    case Family::Specular:
      return {};
    case Family::TanCenter:
      return {Scalar(exp(lambda)), Scalar(0)};
    case Family::ReversibleShear:
      return {Scalar(1), k == Wall::Bottom ? lambda : Scalar(-lambda)};
  }
  return {};
}

template <typename Scalar>
void check_angle(Scalar phi) {
  const Scalar pi = boost::math::constants::pi<Scalar>();
  if (!(phi >= Scalar(0) && phi <= pi)) {
    throw std::domain_error("angle outside [0, pi]");
  }
}

}  // namespace detail

template <typename Scalar>
Scalar apply_f(const TwistRule& rule, Wall k, Scalar phi) {
  using std::atan2;
  using std::cos;
  using std::sin;
  detail::check_angle(phi);
  if (rule.family == Family::Specular) return phi;
  const auto law = detail::wall_law<Scalar>(rule, k);
  const Scalar pi = boost::math::constants::pi<Scalar>();
  if (phi == Scalar(0) || phi == pi) return phi;
  const Scalar s = sin(phi);
  return atan2(law.a * s, cos(phi) + law.b * s);
}

/// f_k'(phi); at the endpoints this is the one-sided limit.
template <typename Scalar>
Scalar f_derivative(const TwistRule& rule, Wall k, Scalar phi) {
  using std::cos;
  using std::sin;
  detail::check_angle(phi);
  if (rule.family == Family::Specular) return Scalar(1);
  const auto law = detail::wall_law<Scalar>(rule, k);
  const Scalar s = sin(phi);
  const Scalar x = cos(phi) + law.b * s;
  const Scalar y = law.a * s;
  return law.a / (x * x + y * y);
}

/// Reflects an incoming velocity at wall k. Works directly on the velocity:
/// the outgoing direction is proportional to (u + b|v|, a|v|) and is rescaled
/// to the incoming speed.
template <typename Scalar>
Vec2<Scalar> apply_twist_velocity(const TwistRule& rule, Wall k,
                                  const Vec2<Scalar>& p_in) {
  using std::abs;
  using std::sqrt;
  const Scalar u = p_in.x();
  const Scalar v = p_in.y();
  if (v == Scalar(0)) {
    throw DegenerateInput("tangential velocity cannot hit a wall");
  }
  if ((k == Wall::Bottom && v > Scalar(0)) || (k == Wall::Top && v < Scalar(0))) {
    throw DegenerateInput("velocity does not point into the wall");
  }
  const Scalar away = k == Wall::Bottom ? Scalar(1) : Scalar(-1);
  if (rule.family == Family::Specular) return {u, -v};

  const auto law = detail::wall_law<Scalar>(rule, k);
  const Scalar vn = abs(v);
  const Scalar out_u = u + law.b * vn;
  const Scalar out_v = law.a * vn;
  const Scalar speed = sqrt(u * u + v * v);
  const Scalar scale = speed / sqrt(out_u * out_u + out_v * out_v);
  return {out_u * scale, away * out_v * scale};
}

/// The rule that generates the time-reversed dynamics: f_0^- = f_1^{-1} and
/// f_1^- = f_0^{-1}.
inline TwistRule time_reversal_rule(const TwistRule& rule) {
  switch (rule.family) {
    case Family::Specular:
      return TwistRule::specular();
    case Family::TanCenter:
      return TwistRule::tan_center(-rule.lambda);
    case Family::ReversibleShear:
      return rule;
  }
  return rule;
}

/// max over a uniform grid of |f_1(phi) - (pi - f_0(pi - phi))|.
inline double check_opposition(const TwistRule& rule, int grid_size) {
  if (grid_size < 2) throw std::invalid_argument("grid_size must be >= 2");
  const double pi = boost::math::constants::pi<double>();
  double worst = 0.0;
  for (int i = 0; i < grid_size; ++i) {
    const double phi = pi * i / (grid_size - 1);
    const double lhs = apply_f(rule, Wall::Top, phi);
    const double rhs = pi - apply_f(rule, Wall::Bottom, pi - phi);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

/// Incidence angle of an incoming velocity, phi = atan2(|v|, u).
template <typename Scalar>
Scalar incidence_angle(const Vec2<Scalar>& p) {
  using std::abs;
  using std::atan2;
  return atan2(abs(p.y()), p.x());
}

}  // namespace twistgas

#endif  // TWISTGAS_TWIST_HPP
