#ifndef SAWSLE_SLE_HPP
#define SAWSLE_SLE_HPP

// Exact SLE(8/3) distribution functions for the hitting observables and the
// reference curves used for the first-hit observables.
//
// For kappa = 8/3 the probability that the trace avoids a hull A is
// Phi_A'(0)^{5/8}, with Phi_A the hydrodynamically normalized map of H \ A
// onto H. Each CDF below is 1 minus that probability for the hull that the
// event {observable <= t} corresponds to.

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace sawsle::sle {

inline constexpr double kRestrictionExponent = 5.0 / 8.0;

struct Tolerances {
  double g_inverse = 1e-15;  // relative, on x
  int max_iterations = 200;
};

/// sin(pi x) with exact zeros at the integers.
inline double sinpi(double x) {
  double r = std::fmod(x, 2.0);  // (-2, 2)
  if (r > 1.0) r -= 2.0;
  if (r <= -1.0) r += 2.0;
  if (r == 0.0 || r == 1.0) return 0.0;
  if (r == 0.5) return 1.0;
  if (r == -0.5) return -1.0;
  return std::sin(std::numbers::pi * r);
}

/// cos(pi x) with exact values at multiples of 1/2.
inline double cospi(double x) { return sinpi(0.5 - x); }

inline double g(double x) {
  if (!(x > 0.0)) throw std::domain_error("g: argument must be positive");
  return x + std::log(x);
}

/// Inverse of g(x) = x + ln x on (0, inf), by Newton iteration safeguarded
/// with bisection on a bracket that always contains the root.
inline double g_inv(double y, const Tolerances& tol = {}) {
  if (std::isnan(y)) throw std::domain_error("g_inv: NaN argument");
  if (y == std::numeric_limits<double>::infinity()) return y;
  if (y < -700.0) return std::exp(y);  // x = e^{y - x} with x below any double epsilon of 1
  double lo = 0.0, hi = 0.0;
  if (y >= 1.0) {
    lo = 0.5 * y;
    hi = y;
  } else {
    lo = std::exp(y - 1.0);
    hi = std::max(1.0, std::exp(y));
  }
  // Starting point from the asymptotics: x ~ y - ln y for large y, x ~ e^y
  // for very negative y.
  double x = y > 1.0 ? y - std::log(y) : std::exp(y - std::exp(y));
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  for (int it = 0; it < tol.max_iterations; ++it) {
    const double f = x + std::log(x) - y;
    if (f == 0.0) return x;
    if (f > 0.0) hi = x; else lo = x;
    double next = x - f / (1.0 + 1.0 / x);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= tol.g_inverse * next) return next;
    x = next;
  }
  return x;
}

/// P(X_e <= t) in the half-plane.
inline double cdf_xe(double t) {
  if (std::isnan(t)) throw std::domain_error("cdf_xe: NaN argument");
  if (t == -std::numeric_limits<double>::infinity()) return 0.0;
  if (t == std::numeric_limits<double>::infinity()) return 1.0;
  const double u = g_inv(-std::numbers::pi * t - 1.0);
  // u / (u + 1) written to stay accurate when u is huge or tiny.
  return -std::expm1(kRestrictionExponent * -std::log1p(1.0 / u));
}

/// P(Y_e <= t) in the half-plane.
inline double cdf_ye(double t) {
  if (!(t >= 0.0)) throw std::domain_error("cdf_ye: t must be >= 0");
  return -std::expm1(-5.0 / 16.0 * std::log1p(t * t));
}

/// Conformal map of H minus the arc {e^{i theta}: 0 <= theta <= pi t} onto H,
/// restricted to real x in (-1, 1), with s = (1 + cos pi t) / 2.
inline double phi_arc(double x, double s) {
  const double k = 1.0 - 4.0 * x * s / ((x + 1.0) * (x + 1.0));
  return 2.0 * s / (1.0 + std::sqrt(k));
}

/// Closed form of phi_arc'(-d).
inline double phi_arc_derivative(double d, double s) {
  const double e = 1.0 - d;
  const double root = std::sqrt(e * e + 4.0 * d * s);
  const double den = (e + root) * (e + root) * root;
  return 4.0 * s * s * (1.0 + d) / den;
}

/// P(Theta_e <= t) for the semicircle of radius c centred at cd.
inline double cdf_theta_e(double t, double d) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("cdf_theta_e: t must lie in [0, 1]");
  if (!(d > -1.0 && d < 1.0)) throw std::domain_error("cdf_theta_e: d must lie in (-1, 1)");
  if (t == 0.0) return 0.0;
  if (t == 1.0) return 1.0;
  const double s = 0.5 * (1.0 + cospi(t));
  return -std::expm1(kRestrictionExponent * std::log(phi_arc_derivative(d, s)));
}

/// Probability that the trace passes to the right of a point with polar
/// angle pi u, as a function of u = theta / pi.
inline double pass_right_prob_normalized(double u) {
  if (!(u >= 0.0 && u <= 1.0)) throw std::domain_error("pass_right_prob: angle must lie in [0, pi]");
  return 0.5 * (1.0 - cospi(u));
}

inline double pass_right_prob(double theta) {
  if (!(theta >= 0.0 && theta <= std::numbers::pi)) {
    throw std::domain_error("pass_right_prob: angle must lie in [0, pi]");
  }
  return pass_right_prob_normalized(theta / std::numbers::pi);
}

// Reference curves for the first-hit observables. They are simple fits, not
// SLE results.

inline double ref_x(double t) { return 0.5 * (std::tanh(1.16 * t) + 1.0); }

inline double ref_y(double t) { return 1.0 - std::pow(1.0 + t * t, -5.0 / 16.0); }

inline double ref_theta(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("ref_theta: t must lie in [0, 1]");
  return t - 0.12 * sinpi(2.0 * t) - 0.009 * sinpi(4.0 * t);
}

}  // namespace sawsle::sle

#endif  // SAWSLE_SLE_HPP
