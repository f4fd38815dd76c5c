#ifndef TWISTGAS_QUADRATURE_HPP
#define TWISTGAS_QUADRATURE_HPP

#include <nlohmann/json.hpp>

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "twistgas/twist.hpp"

namespace twistgas {

class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& what, double achieved)
      : std::runtime_error(what), achieved_(achieved) {}
  double achieved() const { return achieved_; }

 private:
  double achieved_;
};

struct QuadResult {
  double value = 0.0;
  double error = 0.0;
};

struct QuadOptions {
  double abs_tol = 1e-9;
  int max_panels = 20000;
};

/// Globally adaptive 15-point Gauss-Kronrod on [a, b]: the panel with the
/// largest error estimate is bisected until the summed estimate is below
/// abs_tol. Panels are summed left to right. Throws QuadratureError when the
/// panel budget runs out first.
QuadResult integrate(const std::function<double(double)>& fn, double a, double b,
                     const QuadOptions& opts = {});

/// int_0^{2pi} log[1 - (1 - a^2) sin^2(beta)] dbeta, by quadrature.
QuadResult beta_inner_integral(double a, const QuadOptions& opts = {});

/// Closed form of the same integral: 4 pi log((1 + a) / 2).
double beta_inner_closed_form(double a);

/// log(sin f_k(phi) / sin phi), evaluated without cancellation at the ends.
double log_sine_ratio(const TwistRule& rule, Wall k, double phi);

struct LemmaResult {
  double mu1 = 0.0;
  double mu2 = 0.0;
  TwistRule rule{};
  Wall wall = Wall::Bottom;
  double estimated_error = 0.0;
};

/// mu_1 via the reduced form int_0^pi 4 pi log((1 + f') / 2) dphi.
QuadResult mu1(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

/// mu_1 via the full double integral over [0, pi] x [0, 2 pi].
QuadResult mu1_2d(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

/// mu_2 = (1/pi) int_0^pi log(sin f_k(phi) / sin phi) dphi.
QuadResult mu2(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

LemmaResult lemma_values(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

/// (1/pi) int_0^pi f_k'(phi) dphi; equals 1 for every homeomorphism of [0, pi].
QuadResult derivative_mean(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

/// (1/pi) int_0^pi log((1 + f_k') / 2) dphi; at most log of the mean, i.e. 0.
QuadResult mean_log_half(const TwistRule& rule, Wall k, const QuadOptions& opts = {});

/// The graph of f_k in rotated coordinates s = (f + phi)/2, w = (f - phi)/2.
struct WPath {
  std::vector<double> s;
  std::vector<double> w;
  std::vector<double> w_prime;  // dw/ds
};

/// phi with (f_k(phi) + phi) / 2 = s.
double phi_from_s(const TwistRule& rule, Wall k, double s);

/// Samples w(s) on n >= 2 equally spaced s in [0, pi].
WPath w_path(const TwistRule& rule, Wall k, int n);

/// int_0^pi log[sin(s + w) / sin(s - w)] ds, zero for a reversible rule.
QuadResult symmetric_log_integral(const TwistRule& rule, Wall k,
                                  const QuadOptions& opts = {});

/// F(t) = int_0^pi log[sin(s + t w) / sin(s - t w)] w'(s) ds, integrated in
/// the s variable. Only defined for reversible rules.
std::vector<QuadResult> f_curve(const TwistRule& rule, Wall k,
                                const std::vector<double>& t_grid,
                                const QuadOptions& opts = {});

/// Table row for the lemmas subcommand.
nlohmann::json lemma_report(const TwistRule& rule, const std::vector<double>& t_grid,
                            const QuadOptions& opts = {});

}  // namespace twistgas

#endif  // TWISTGAS_QUADRATURE_HPP
