#pragma once

#include <functional>

namespace fblcap {

inline constexpr double kLog2e = 1.4426950408889634074;

struct Tolerance {
  double rel = 1e-12;
  double abs = 0.0;
  int max_iter = 30;

  void validate() const;
};

/// Gaussian tail probability Q(x) = P(N(0,1) > x).
double q_func(double x);

/// Inverse of q_func on the open interval (0,1). Throws DomainError otherwise.
double q_inv(double p);

/// Generalized exponential integral E_v(x) = int_1^inf exp(-x t) t^-v dt
/// for real order v > 1 and x >= 0.
double expint_v(double v, double x);

/// exp(x) * E_v(x). Finite for large x where E_v itself underflows.
double expint_v_scaled(double v, double x);

/// Adaptive Gauss-Kronrod quadrature of f over [lower, inf).
///
/// Throws ConvergenceError when the error estimate does not meet
/// max(tol.abs, tol.rel * |result|) within tol.max_iter bisection levels,
/// and NumericalError if the result is not finite.
double quad_oracle(const std::function<double(double)>& f, const Tolerance& tol,
                   double lower = 0.0);

}  // namespace fblcap
