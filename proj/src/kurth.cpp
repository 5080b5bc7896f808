#include "vpdisp/kurth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "vpdisp/errors.hpp"

namespace vpdisp {

using std::numbers::pi;

std::string_view regime_name(KurthRegime regime) {
  switch (regime) {
    case KurthRegime::static_state:
      return "static";
    case KurthRegime::periodic:
      return "periodic";
    case KurthRegime::dispersive:
      break;
  }
  return "dispersive";
}

double kurth_energy(double k) { return 0.6 * (k * k - 1.0); }

double kurth_first_integral(const KurthState& s) {
  return 0.6 * (s.phi_dot * s.phi_dot + 1.0 / (s.phi * s.phi) - 2.0 / s.phi);
}

KurthRegime classify_k(double k) {
  if (k == 0.0) return KurthRegime::static_state;
  if (std::abs(k) < 1.0) return KurthRegime::periodic;
  return KurthRegime::dispersive;
}

namespace {

double phi_acceleration(double phi) { return (1.0 - phi) / (phi * phi * phi); }

// Root of an increasing function on [lo, hi] with f(lo) <= 0 <= f(hi):
// Newton steps, falling back to bisection whenever a step leaves the bracket
// or fails to halve the residual.
template <typename F, typename DF>
double safeguarded_newton(F f, DF df, double lo, double hi, double x,
                          double tol = 4.0 * std::numeric_limits<double>::epsilon()) {
  double fx = f(x);
  for (int it = 0; it < 200; ++it) {
    if (fx == 0.0) return x;
    if (fx < 0.0)
      lo = x;
    else
      hi = x;
    const double slope = df(x);
    double next = slope > 0.0 ? x - fx / slope : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    double fnext = f(next);
    if (std::abs(fnext) > 0.5 * std::abs(fx) && next != 0.5 * (lo + hi)) {
      // slow progress: bisect instead
      next = 0.5 * (lo + hi);
      fnext = f(next);
    }
    const bool done = std::abs(next - x) <= tol * std::max(1.0, std::abs(next));
    x = next;
    fx = fnext;
    if (done || hi - lo <= tol * std::max(1.0, std::abs(x))) return x;
  }
  return x;
}

// One triple-jump (Yoshida) step of the leapfrog for phi'' = (1 - phi) / phi^3.
void yoshida_step(double& phi, double& phi_dot, double h) {
  static const double cbrt2 = std::cbrt(2.0);
  static const double w1 = 1.0 / (2.0 - cbrt2);
  static const double w0 = -cbrt2 / (2.0 - cbrt2);
  for (double w : {w1, w0, w1}) {
    const double s = w * h;
    phi_dot += 0.5 * s * phi_acceleration(phi);
    phi += s * phi_dot;
    if (!(phi > 0.0) || !std::isfinite(phi)) throw SingularityError("integrate_phi: phi collapsed to 0");
    phi_dot += 0.5 * s * phi_acceleration(phi);
  }
}

}  // namespace

std::vector<KurthState> integrate_phi(double k, double t_end, double dt,
                                      const KurthIntegratorOptions& options) {
  if (!(dt > 0.0)) throw DomainError("integrate_phi: dt must be positive");
  if (!(t_end >= 0.0)) throw DomainError("integrate_phi: t_end must be non-negative");
  if (!std::isfinite(k)) throw DomainError("integrate_phi: k must be finite");
  std::vector<KurthState> out;
  double phi = 1.0;
  double phi_dot = k;
  double t = 0.0;
  out.push_back({0.0, phi, phi_dot});
  const auto samples = static_cast<long>(std::floor(t_end / dt + 1e-9));
  for (long n = 1; n <= samples; ++n) {
    const double target = static_cast<double>(n) * dt;
    while (t < target) {
      double h = options.base_step * std::min(std::pow(phi, 1.5), options.growth_cap);
      if (h >= target - t) h = target - t;
      yoshida_step(phi, phi_dot, h);
      t = h == target - t ? target : t + h;
    }
    out.push_back({target, phi, phi_dot});
  }
  return out;
}

double phi_parabolic(double t) {
  if (!(t >= 0.0)) throw DomainError("phi_parabolic: t must be non-negative");
  const double rhs = 2.0 * (t + 2.0 / 3.0);
  const auto f = [rhs](double v) { return v + v * v * v / 3.0 - rhs; };
  const auto df = [](double v) { return 1.0 + v * v; };
  const double hi = std::cbrt(3.0 * rhs) + 1.0;
  const double v = safeguarded_newton(f, df, 0.0, hi, std::min(hi, std::cbrt(3.0 * rhs)));
  return 0.5 * (1.0 + v * v);
}

double phi_dot_parabolic(double t) {
  const double phi = phi_parabolic(t);
  return std::sqrt(2.0 * phi - 1.0) / phi;
}

double hyperbolic_time_offset(double k) {
  const double a = std::abs(k);
  if (!(a > 1.0)) throw DomainError("hyperbolic closed form requires |k| > 1");
  const double c = a * a - 1.0;
  return -(a * std::sqrt(c) - std::acosh(a)) / std::pow(c, 1.5);
}

double hyperbolic_parameter(double t, double k) {
  const double a = std::abs(k);
  if (!(a > 1.0)) throw DomainError("phi_hyperbolic requires |k| > 1");
  if (!(t >= 0.0)) throw DomainError("phi_hyperbolic: t must be non-negative");
  const double c = a * a - 1.0;
  const double u0 = std::acosh(a);
  const double rhs = a * std::sqrt(c) - u0 + std::pow(c, 1.5) * t;
  const auto f = [a, rhs](double u) { return a * std::sinh(u) - u - rhs; };
  const auto df = [a](double u) { return a * std::cosh(u) - 1.0; };
  double hi = u0 + 1.0;
  while (f(hi) < 0.0) hi = u0 + 2.0 * (hi - u0);
  return safeguarded_newton(f, df, u0, hi, u0);
}

double phi_hyperbolic(double t, double k) {
  const double a = std::abs(k);
  const double u = hyperbolic_parameter(t, k);
  return (a * std::cosh(u) - 1.0) / (a * a - 1.0);
}

double phi_dot_hyperbolic(double t, double k) {
  const double a = std::abs(k);
  const double u = hyperbolic_parameter(t, k);
  const double c = a * a - 1.0;
  const double phi = (a * std::cosh(u) - 1.0) / c;
  return a * std::sinh(u) / (std::sqrt(c) * phi);
}

TurningPoints kurth_turning_points(double k) {
  const double a = std::abs(k);
  if (!(a > 0.0 && a < 1.0)) throw DomainError("turning points require 0 < |k| < 1");
  // roots of (k^2 - 1) phi^2 + 2 phi - 1 = 0
  return {1.0 / (1.0 + a), 1.0 / (1.0 - a)};
}

double kurth_period(double k) {
  const double a = std::abs(k);
  if (!(a > 0.0 && a < 1.0)) throw DomainError("kurth_period requires 0 < |k| < 1");
  const double c = a * a - 1.0;
  const auto tp = kurth_turning_points(k);
  const double mid = 0.5 * (tp.phi_min + tp.phi_max);
  const double half = 0.5 * (tp.phi_max - tp.phi_min);
  // phi = mid - half cos(theta) removes the inverse square-root endpoints;
  // phi - lo and hi - phi are written in half-angle form.
  const auto integrand = [=](double theta) {
    const double phi = mid - half * std::cos(theta);
    const double s = std::sin(0.5 * theta), co = std::cos(0.5 * theta);
    const double radicand = -c * (2.0 * half * s * s) * (2.0 * half * co * co);
    if (radicand <= 0.0) return phi / std::sqrt(-c);
    return half * std::sin(theta) * phi / std::sqrt(radicand);
  };
  double error = 0.0;
  const double integral =
      boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, pi, 15, 1e-13, &error);
  return 2.0 * integral;
}

KurthState kurth_state(double k, double t) {
  if (k == 0.0) return {t, 1.0, 0.0};
  if (k == 1.0) return {t, phi_parabolic(t), phi_dot_parabolic(t)};
  if (k > 1.0) return {t, phi_hyperbolic(t, k), phi_dot_hyperbolic(t, k)};
  return integrate_phi(k, t, std::max(t, 1e-300)).back();
}

KurthEnergySplit kurth_energy_split(const KurthState& s) {
  return {0.6 * (s.phi_dot * s.phi_dot + 1.0 / (s.phi * s.phi)), 1.2 / s.phi};
}

double kurth_lq_norm(double phi, double q) {
  if (!(q >= 1.0)) throw DomainError("lq_norm: q must be >= 1");
  const double e = (q - 1.0) / q;
  return std::pow(3.0 / (4.0 * pi), e) * std::pow(phi, -3.0 * e);
}

DiagnosticsRecord kurth_diagnostics(const KurthState& s, const std::vector<double>& q_list,
                                    const std::vector<double>& R_grid) {
  if (!(s.phi > 0.0)) throw DomainError("kurth_diagnostics: phi must be positive");
  DiagnosticsRecord rec;
  rec.time = s.t;
  rec.energy_total = kurth_first_integral(s);
  rec.mass = 1.0;
  rec.variance = 0.6 * s.phi * s.phi;
  rec.inner_radius = 0.0;
  rec.outer_radius = s.phi;
  for (double R : R_grid) {
    if (!(R > 0.0)) throw DomainError("concentration radius must be positive");
    const double x = R / s.phi;
    rec.concentration.emplace_back(R, x >= 1.0 ? 1.0 : x * x * x);
  }
  for (double q : q_list) rec.lq_norms.emplace_back(q, kurth_lq_norm(s.phi, q));
  return rec;
}

}  // namespace vpdisp
