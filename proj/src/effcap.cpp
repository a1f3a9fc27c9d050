#include "fblcap/effcap.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fblcap/errors.hpp"
#include "fblcap/specfun.hpp"

namespace fblcap {

namespace {

void require_admissible_order(const SystemParams& params, std::string_view who) {
  params.validate();
  const double order = params.expint_order();
  if (!(order > 1.0)) {
    std::ostringstream msg;
    msg << who << ": requires theta' n_d > 1 (theta' n_d = " << order << ")";
    throw DomainError(msg.str());
  }
}

double log_sum_exp(double a, double b) {
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  if (hi == -INFINITY) return hi;
  return hi + std::log1p(std::exp(lo - hi));
}

// ln of eps + (1 - eps) exp(theta' sqrt(m n_d) Q^-1(eps)) B^m given ln B.
double log_mixture(const SystemParams& params, double log_bracket) {
  const double penalty =
      params.theta_prime() * std::sqrt(static_cast<double>(params.m) * params.n_d()) *
      q_inv(params.eps);
  const double success = std::log1p(-params.eps) + penalty + params.m * log_bracket;
  return log_sum_exp(std::log(params.eps), success);
}

void check_alpha_window(double alpha, double theta, int n) {
  if (!(alpha > 0.0 && alpha < 0.2)) {
    std::ostringstream msg;
    msg << "pilot fraction alpha must lie in (0, 0.2) (got " << alpha << ")";
    throw DomainError(msg.str());
  }
  if (n < 2) throw DomainError("block length n must be >= 2");
  if (!(theta > 0.0)) throw DomainError("theta must be > 0");
  const double order = theta * kLog2e * n * (1.0 - alpha);
  if (!(order > 1.0)) {
    std::ostringstream msg;
    msg << "requires theta' n (1 - alpha) > 1 (got " << order << ")";
    throw DomainError(msg.str());
  }
}

// The second term of the surrogate is (m/theta) ln(N(alpha)/D(alpha)) with
//   N = -t n^2 g^2 a^2 + (t n^2 g^2 - n g^2 + n g) a + 1 + g,
//   D = 1 + g + n g a,
// t = theta', g = gamma0, a = alpha.
struct SurrogateRatio {
  double num, den, dnum, dden;
};

SurrogateRatio surrogate_ratio(double gamma0, double alpha, double theta, int n) {
  const double tp = theta * kLog2e;
  const double nn = static_cast<double>(n);
  const double g2 = gamma0 * gamma0;
  const double quad = tp * nn * nn * g2;
  const double lin = quad - nn * g2 + nn * gamma0;
  return {-quad * alpha * alpha + lin * alpha + 1.0 + gamma0, 1.0 + gamma0 + nn * gamma0 * alpha,
          -2.0 * quad * alpha + lin, nn * gamma0};
}

void check_surrogate_args(int m, double gamma0, double eps, double alpha, double theta, int n) {
  if (m < 1) throw DomainError("m must be >= 1");
  if (!(gamma0 > 0.0)) throw DomainError("gamma0 must be > 0");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("eps must lie in (0,1)");
  check_alpha_window(alpha, theta, n);
}

}  // namespace

std::string_view to_string(EcMethod method) {
  switch (method) {
    case EcMethod::kExpint: return "expint";
    case EcMethod::kLowerBound: return "lower_bound";
    case EcMethod::kQuadrature: return "quadrature";
    case EcMethod::kMonteCarlo: return "monte_carlo";
  }
  return "unknown";
}

double ec_cap(double theta, double eps) { return -std::log(eps) / theta; }

double log_inner_t(const SystemParams& params) {
  require_admissible_order(params, "ec_expint");
  const double snr = avg_received_snr(params.n_t, params.gamma0);
  const double x = 1.0 / snr;
  // (1/G) e^{1/G} E_v(1/G) = E[(1 + G X)^-v], X ~ Exp(1)
  const double bracket = x * expint_v_scaled(params.expint_order(), x);
  return log_mixture(params, std::log(bracket));
}

double inner_t(const SystemParams& params) { return std::exp(log_inner_t(params)); }

EcValue ec_expint(const SystemParams& params) {
  const double value = -log_inner_t(params) / params.theta;
  if (!std::isfinite(value)) throw NumericalError("ec_expint: non-finite result");
  return {value, EcMethod::kExpint, 0.0, std::nullopt};
}

EcValue ec_lower_bound(const SystemParams& params) {
  require_admissible_order(params, "ec_lower_bound");
  const double order = params.expint_order();
  const double snr = avg_received_snr(params.n_t, params.gamma0);
  const double log_bracket = -std::log1p((order - 1.0) * snr);
  const double value = -log_mixture(params, log_bracket) / params.theta;
  if (!std::isfinite(value)) throw NumericalError("ec_lower_bound: non-finite result");

  EcValue out{value, EcMethod::kLowerBound, 0.0, std::nullopt};
  if (order <= 2.0) {
    std::ostringstream msg;
    msg << "theta' n_d = " << order << " <= 2: the closed-form lower bound is loose";
    out.warning = msg.str();
  }
  return out;
}

double gamma_surrogate(int m, double gamma0, double alpha, double eps, double theta, int n) {
  check_surrogate_args(m, gamma0, eps, alpha, theta, n);
  const double nn = static_cast<double>(n);
  const double snr = avg_received_snr(nn * alpha, gamma0);
  const double tp = theta * kLog2e;
  const double rate_penalty =
      -std::sqrt(static_cast<double>(m) * nn) * q_inv(eps) * kLog2e * (1.0 - alpha / 2.0);
  return rate_penalty + (m / theta) * std::log1p((tp * nn * (1.0 - alpha) - 1.0) * snr);
}

double gamma_dalpha(int m, double gamma0, double alpha, double eps, double theta, int n) {
  check_surrogate_args(m, gamma0, eps, alpha, theta, n);
  const auto r = surrogate_ratio(gamma0, alpha, theta, n);
  const double penalty_slope =
      std::sqrt(static_cast<double>(m) * n) * q_inv(eps) * kLog2e / 2.0;
  return penalty_slope + (m / theta) * (r.dnum / r.num - r.dden / r.den);
}

void DelaySpec::validate() const {
  if (!(mu >= 0.0)) throw DomainError("DelaySpec: mu must be >= 0");
  if (!(d_max >= 0.0)) throw DomainError("DelaySpec: d_max must be >= 0");
  if (!(eta >= 0.0 && eta <= 1.0)) throw DomainError("DelaySpec: eta must lie in [0,1]");
}

double delay_violation(double theta, const DelaySpec& spec) {
  spec.validate();
  if (!(theta > 0.0)) throw DomainError("delay_violation: theta must be > 0");
  return std::clamp(spec.eta * std::exp(-theta * spec.mu * spec.d_max), 0.0, 1.0);
}

}  // namespace fblcap
