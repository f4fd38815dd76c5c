#include "twistgas/quadrature.hpp"

#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace twistgas {

namespace {

constexpr double kPi = boost::math::constants::pi<double>();

struct Panel {
  double a = 0.0;
  double b = 0.0;
  double value = 0.0;
  double error = 0.0;
};

Panel evaluate_panel(const std::function<double(double)>& fn, double a, double b) {
  using Rule = boost::math::quadrature::gauss_kronrod<double, 15>;
  Panel p{a, b};
  p.value = Rule::integrate(fn, a, b, 0, 0.0, &p.error);
  // Boost 1.74 reports the error of the panel mapped onto [-1, 1].
  p.error *= 0.5 * (b - a);
  if (!std::isfinite(p.value) || !std::isfinite(p.error)) {
    throw QuadratureError("integrand is not finite on [" + std::to_string(a) + ", " +
                              std::to_string(b) + "]",
                          std::numeric_limits<double>::infinity());
  }
  return p;
}

bool is_reversible(const TwistRule& rule) {
  return rule.family != Family::TanCenter || rule.lambda == 0.0;
}

void require_reversible(const TwistRule& rule) {
  if (!is_reversible(rule)) {
    throw std::invalid_argument(
        "the w(s) construction needs a reversible rule (specular or reversible-shear)");
  }
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& fn, double a, double b,
                     const QuadOptions& opts) {
  if (!(b > a)) throw std::invalid_argument("integration needs a < b");
  const auto worse = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  std::vector<Panel> heap{evaluate_panel(fn, a, b)};
  double total_error = heap.front().error;
  while (total_error > opts.abs_tol) {
    std::pop_heap(heap.begin(), heap.end(), worse);
    const Panel worst = heap.back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (static_cast<int>(heap.size()) >= opts.max_panels ||
        !(mid > worst.a && mid < worst.b)) {
      throw QuadratureError("quadrature did not reach the requested tolerance",
                            total_error);
    }
    const Panel left = evaluate_panel(fn, worst.a, mid);
    const Panel right = evaluate_panel(fn, mid, worst.b);
    heap.back() = left;
    std::push_heap(heap.begin(), heap.end(), worse);
    heap.push_back(right);
    std::push_heap(heap.begin(), heap.end(), worse);
    total_error += left.error + right.error - worst.error;
  }
  auto all = std::move(heap);
  std::sort(all.begin(), all.end(), [](const Panel& x, const Panel& y) { return x.a < y.a; });
  QuadResult out;
  for (const auto& p : all) {
    out.value += p.value;
    out.error += p.error;
  }
  out.error = std::max(out.error, std::numeric_limits<double>::epsilon() *
                                      std::max(1.0, std::abs(out.value)));
  return out;
}

QuadResult beta_inner_integral(double a, const QuadOptions& opts) {
  if (!(a > 0.0)) throw std::domain_error("beta integral needs a > 0");
  const double m = 1.0 - a * a;
  return integrate([m](double beta) {
    const double s = std::sin(beta);
    return std::log1p(-m * s * s);
  }, 0.0, 2 * kPi, opts);
}

double beta_inner_closed_form(double a) {
  if (!(a > 0.0)) throw std::domain_error("beta integral needs a > 0");
  return 4 * kPi * std::log(0.5 * (1.0 + a));
}

double log_sine_ratio(const TwistRule& rule, Wall k, double phi) {
  detail::check_angle(phi);
  if (rule.family == Family::Specular) return 0.0;
  // With f = atan2(a sin, cos + b sin), sin f / sin phi = a / r exactly.
  const auto law = detail::wall_law<double>(rule, k);
  const double s = std::sin(phi);
  const double x = std::cos(phi) + law.b * s;
  const double y = law.a * s;
  return std::log(law.a) - 0.5 * std::log(x * x + y * y);
}

QuadResult mu1(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  return integrate([&](double phi) {
    return 4 * kPi * std::log(0.5 * (1.0 + f_derivative(rule, k, phi)));
  }, 0.0, kPi, opts);
}

QuadResult mu1_2d(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  QuadOptions inner = opts;
  inner.abs_tol = opts.abs_tol / (10 * kPi);
  double inner_error = 0.0;
  auto out = integrate([&](double phi) {
    const double fp = f_derivative(rule, k, phi);
    const double m = 1.0 - fp * fp;
    const auto r = integrate([&](double beta) {
      const double s = std::sin(beta - phi);
      return std::log1p(-m * s * s);
    }, 0.0, 2 * kPi, inner);
    inner_error = std::max(inner_error, r.error);
    return r.value;
  }, 0.0, kPi, opts);
  out.error += kPi * inner_error;
  return out;
}

QuadResult mu2(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  QuadOptions scaled = opts;
  scaled.abs_tol = opts.abs_tol * kPi;
  auto out = integrate([&](double phi) { return log_sine_ratio(rule, k, phi); },
                       0.0, kPi, scaled);
  out.value /= kPi;
  out.error /= kPi;
  return out;
}

LemmaResult lemma_values(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  const auto first = mu1(rule, k, opts);
  const auto second = mu2(rule, k, opts);
  return {first.value, second.value, rule, k, std::max(first.error, second.error)};
}

QuadResult derivative_mean(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  auto out = integrate([&](double phi) { return f_derivative(rule, k, phi); }, 0.0,
                       kPi, opts);
  out.value /= kPi;
  out.error /= kPi;
  return out;
}

QuadResult mean_log_half(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  auto out = integrate([&](double phi) {
    return std::log(0.5 * (1.0 + f_derivative(rule, k, phi)));
  }, 0.0, kPi, opts);
  out.value /= kPi;
  out.error /= kPi;
  return out;
}

double phi_from_s(const TwistRule& rule, Wall k, double s) {
  if (!(s >= 0.0 && s <= kPi)) throw std::domain_error("s outside [0, pi]");
  if (s == 0.0 || s == kPi) return s;
  const auto residual = [&](double phi) {
    return 0.5 * (apply_f(rule, k, phi) + phi) - s;
  };
  std::uintmax_t iterations = 200;
  const auto bracket = boost::math::tools::toms748_solve(
      residual, 0.0, kPi, -s, kPi - s, boost::math::tools::eps_tolerance<double>(),
      iterations);
  return 0.5 * (bracket.first + bracket.second);
}

namespace {

struct WPoint {
  double w = 0.0;
  double w_prime = 0.0;
};

WPoint w_at(const TwistRule& rule, Wall k, double s) {
  const double phi = phi_from_s(rule, k, s);
  const double fp = f_derivative(rule, k, phi);
  return {s - phi, (fp - 1.0) / (fp + 1.0)};
}

double log_shifted_ratio(double s, double shift) {
  return std::log(std::sin(s + shift) / std::sin(s - shift));
}

}  // namespace

WPath w_path(const TwistRule& rule, Wall k, int n) {
  if (n < 2) throw std::invalid_argument("w_path needs at least two samples");
  WPath path;
  for (int i = 0; i < n; ++i) {
    const double s = i == n - 1 ? kPi : kPi * i / (n - 1);
    const auto point = w_at(rule, k, s);
    path.s.push_back(s);
    path.w.push_back(point.w);
    path.w_prime.push_back(point.w_prime);
  }
  return path;
}

QuadResult symmetric_log_integral(const TwistRule& rule, Wall k, const QuadOptions& opts) {
  require_reversible(rule);
  return integrate([&](double s) {
    return log_shifted_ratio(s, w_at(rule, k, s).w);
  }, 0.0, kPi, opts);
}

std::vector<QuadResult> f_curve(const TwistRule& rule, Wall k,
                                const std::vector<double>& t_grid,
                                const QuadOptions& opts) {
  require_reversible(rule);
  std::vector<QuadResult> out;
  out.reserve(t_grid.size());
  for (const double t : t_grid) {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("F(t) needs t in [0, 1]");
    out.push_back(integrate([&](double s) {
      const auto point = w_at(rule, k, s);
      return log_shifted_ratio(s, t * point.w) * point.w_prime;
    }, 0.0, kPi, opts));
  }
  return out;
}

nlohmann::json lemma_report(const TwistRule& rule, const std::vector<double>& t_grid,
                            const QuadOptions& opts) {
  using nlohmann::json;
  json report;
  report["schema"] = "twistgas.lemmas/1";
  report["family"] = to_string(rule.family);
  report["lambda"] = rule.effective_lambda();
  report["beta_constant"] = 4 * kPi;
  report["walls"] = json::array();
  for (const Wall k : {Wall::Bottom, Wall::Top}) {
    const auto first = mu1(rule, k, opts);
    const auto first_2d = mu1_2d(rule, k, opts);
    const auto second = mu2(rule, k, opts);
    json row{{"k", index(k)},
             {"mu1", first.value},
             {"mu1_error", first.error},
             {"mu1_2d", first_2d.value},
             {"mu1_2d_error", first_2d.error},
             {"mu2", second.value},
             {"mu2_error", second.error},
             {"derivative_mean", derivative_mean(rule, k, opts).value}};
    if (is_reversible(rule)) {
      const auto curve = f_curve(rule, k, t_grid, opts);
      json points = json::array();
      for (std::size_t i = 0; i < curve.size(); ++i) {
        points.push_back({{"t", t_grid[i]}, {"F", curve[i].value}, {"error", curve[i].error}});
      }
      row["f_curve"] = points;
    }
    report["walls"].push_back(row);
  }
  return report;
}

}  // namespace twistgas
