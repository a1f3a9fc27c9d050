#include "fblcap/specfun.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "fblcap/errors.hpp"

namespace fblcap {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEulerGamma = std::numbers::egamma;
constexpr double kZeta3 = 1.2020569031595942854;
constexpr double kZeta4 = 1.0823232337111381915;

// Acklam's rational approximation of the standard normal quantile,
// relative error about 1.15e-9 over the whole range.
double normal_quantile_initial(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - p_low) {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi); }

void check_order(double v, double x) {
  if (!(v > 1.0) || !std::isfinite(v)) {
    std::ostringstream msg;
    msg << "expint_v: order v must be > 1 (got " << v << ")";
    throw DomainError(msg.str());
  }
  if (!(x >= 0.0) || !std::isfinite(x)) {
    std::ostringstream msg;
    msg << "expint_v: argument x must be finite and >= 0 (got " << x << ")";
    throw DomainError(msg.str());
  }
}

// Divided difference h(delta) such that the singular pair of the power series,
//   Gamma(1-v) x^(v-1) + (-x)^(n-1) / ((n-1)! delta),  v = n + delta,
// equals (-1)^(n-1) x^(n-1)/(n-1)! * (-expm1(delta*h)/delta).
double singular_pair_slope(int n, double delta, double log_x) {
  if (std::abs(delta) < 1e-3) {
    double h1 = 0.0, h2 = 0.0, h3 = 0.0, h4 = 0.0;  // partial sums of 1/k^p, k < n
    for (int k = 1; k < n; ++k) {
      const double inv = 1.0 / k;
      const double inv2 = inv * inv;
      h1 += inv;
      h2 += inv2;
      h3 += inv2 * inv;
      h4 += inv2 * inv2;
    }
    const double psi0 = -kEulerGamma + h1;
    const double psi1 = kPi * kPi / 6.0 - h2;
    const double psi2 = -2.0 * (kZeta3 - h3);
    const double psi3 = 6.0 * (kZeta4 - h4);
    const double pi2 = kPi * kPi;
    // ln(pi d / sin(pi d)) / d = pi^2 d/6 + pi^4 d^3/180 + O(d^5)
    const double log_sinc = pi2 * delta / 6.0 + pi2 * pi2 * delta * delta * delta / 180.0;
    // (lgamma(n+d) - lgamma(n)) / d
    const double lgamma_slope =
        psi0 + delta * (psi1 / 2.0 + delta * (psi2 / 6.0 + delta * psi3 / 24.0));
    return log_x + log_sinc - lgamma_slope;
  }
  const double y = kPi * delta;
  const double log_sinc = std::log(y / std::sin(y));
  const double lgamma_diff = std::lgamma(n + delta) - std::lgamma(static_cast<double>(n));
  return log_x + (log_sinc - lgamma_diff) / delta;
}

// Power series for 0 < x <= 1. The term k = n-1 is singular at integer v and
// is combined analytically with the Gamma(1-v) x^(v-1) term.
double expint_series(double v, double x) {
  const int n = static_cast<int>(std::lround(v));
  const double delta = v - n;
  const int j = n - 1;
  const double log_x = std::log(x);

  const double h = singular_pair_slope(n, delta, log_x);
  const double ratio = delta == 0.0 ? -h : -std::expm1(delta * h) / delta;
  const double mag = std::exp(j * log_x - std::lgamma(static_cast<double>(n)));
  const double pair = (j % 2 == 0 ? 1.0 : -1.0) * mag * ratio;

  double sum = 0.0;
  double term = 1.0;  // (-x)^k / k!
  for (int k = 0; k < j + 500; ++k) {
    if (k > 0) term *= -x / k;
    if (k != j) {
      const double t = term / (k + 1 - v);
      sum += t;
      if (k > j && std::abs(t) <= std::numeric_limits<double>::epsilon() * 0.25 * std::abs(sum))
        return pair - sum;
    }
  }
  throw ConvergenceError("expint_v: power series did not converge");
}

// Continued fraction (modified Lentz) for x > 1; returns exp(x) E_v(x).
double expint_cf_scaled(double v, double x) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  double b = x + v;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 100000; ++i) {
    const double an = -static_cast<double>(i) * (v - 1.0 + i);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) <= eps) return h;
  }
  throw ConvergenceError("expint_v: continued fraction did not converge");
}

}  // namespace

void Tolerance::validate() const {
  if (!(rel > 0.0) || !(abs >= 0.0) || max_iter < 1)
    throw DomainError("Tolerance requires rel > 0, abs >= 0, max_iter >= 1");
}

double q_func(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inv(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    std::ostringstream msg;
    msg << "q_inv: probability must lie in the open interval (0,1) (got " << p << ")";
    throw DomainError(msg.str());
  }
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -q_inv(1.0 - p);

  double x = -normal_quantile_initial(p);
  for (int step = 0; step < 2; ++step) x += (q_func(x) - p) / normal_pdf(x);
  return x;
}

double expint_v(double v, double x) {
  check_order(v, x);
  if (x == 0.0) return 1.0 / (v - 1.0);
  if (x <= 1.0) return expint_series(v, x);
  return std::exp(-x) * expint_cf_scaled(v, x);
}

double expint_v_scaled(double v, double x) {
  check_order(v, x);
  if (x == 0.0) return 1.0 / (v - 1.0);
  if (x <= 1.0) return std::exp(x) * expint_series(v, x);
  return expint_cf_scaled(v, x);
}

double quad_oracle(const std::function<double(double)>& f, const Tolerance& tol, double lower) {
  tol.validate();
  using Integrator = boost::math::quadrature::gauss_kronrod<double, 15>;
  double error = 0.0;
  double l1 = 0.0;
  const double result =
      Integrator::integrate(f, lower, std::numeric_limits<double>::infinity(),
                            static_cast<unsigned>(tol.max_iter), tol.rel, &error, &l1);
  if (!std::isfinite(result)) throw NumericalError("quad_oracle: non-finite integral");
  const double target = std::max(tol.abs, tol.rel * std::abs(result));
  if (error > target) {
    std::ostringstream msg;
    msg << "quad_oracle: error estimate " << error << " exceeds target " << target << " after "
        << tol.max_iter << " subdivision levels";
    throw ConvergenceError(msg.str());
  }
  return result;
}

}  // namespace fblcap
