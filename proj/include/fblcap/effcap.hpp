#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "fblcap/channel.hpp"

namespace fblcap {

enum class EcMethod { kExpint, kLowerBound, kQuadrature, kMonteCarlo };

std::string_view to_string(EcMethod method);

/// Effective capacity in bits/block together with how it was obtained.
struct EcValue {
  double value = 0.0;
  EcMethod method = EcMethod::kExpint;
  double ci_halfwidth = 0.0;
  std::optional<std::string> warning;
};

/// -(1/theta) ln(eps): no operating point can exceed this.
double ec_cap(double theta, double eps);

/// ln T(eps), evaluated by log-sum-exp so large m n_d and tiny eps do not
/// overflow the exp(theta' sqrt(m n_d) Q^-1(eps)) factor.
double log_inner_t(const SystemParams& params);

/// T(eps) = E{eps + (1-eps) exp(-theta m n_d R)} in closed form.
double inner_t(const SystemParams& params);

/// Effective capacity through the exponential-integral closed form.
/// Requires theta' n_d > 1.
EcValue ec_expint(const SystemParams& params);

/// Closed-form lower bound obtained from E_v(x) <= exp(-x)/(v+x-1).
/// Sets EcValue::warning when theta' n_d <= 2, where the bound is loose.
EcValue ec_lower_bound(const SystemParams& params);

/// Surrogate objective in the pilot fraction alpha = n_t/n, using
/// sqrt(1-alpha) ~ 1 - alpha/2. Defined for alpha in (0, 0.2).
double gamma_surrogate(int m, double gamma0, double alpha, double eps, double theta, int n);

/// Analytic d(gamma_surrogate)/d(alpha).
double gamma_dalpha(int m, double gamma0, double alpha, double eps, double theta, int n);

struct DelaySpec {
  double mu = 0.0;     // bits/block served at the effective-capacity operating point
  double d_max = 0.0;  // delay bound in blocks
  double eta = 1.0;    // probability the buffer is non-empty

  void validate() const;
};

/// Approximate P(D > d_max) = eta exp(-theta mu d_max), clipped to [0,1].
double delay_violation(double theta, const DelaySpec& spec);

}  // namespace fblcap
