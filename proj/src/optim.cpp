#include "fblcap/optim.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "fblcap/effcap.hpp"
#include "fblcap/specfun.hpp"

namespace fblcap {

namespace {

constexpr double kAlphaWidth = 1e-7;
constexpr double kLog10EpsWidth = 1e-3;
constexpr double kTieTol = 1e-12;

SystemParams make_params(const LinkSetting& link, int n_t, double eps) {
  SystemParams p;
  p.theta = link.theta;
  p.n = link.n;
  p.n_t = n_t;
  p.m = link.m;
  p.gamma0 = link.gamma0;
  p.eps = eps;
  return p;
}

double lower_bound_at(const LinkSetting& link, int n_t, double eps) {
  return ec_lower_bound(make_params(link, n_t, eps)).value;
}

void require_window(const LinkSetting& link) {
  const double order = link.theta * kLog2e * link.n * (1.0 - kAlphaMax);
  if (!(order > 1.0)) {
    std::ostringstream msg;
    msg << "optimal_alpha: theta' n (1 - 0.2) must exceed 1 (got " << order << ")";
    throw DomainError(msg.str());
  }
  if (link.n < 10) throw DomainError("optimal_alpha: n must be >= 10 so that 1 <= n_t <= 0.2 n");
}

}  // namespace

AlphaResult optimal_alpha(const LinkSetting& link, double eps) {
  require_window(link);
  auto slope = [&](double a) {
    return gamma_dalpha(link.m, link.gamma0, a, eps, link.theta, link.n);
  };

  AlphaResult out;
  double lo = 1.0 / link.n;
  double hi = kAlphaMax * (1.0 - 1e-12);
  if (slope(lo) <= 0.0) {
    out.alpha_star = lo;
    out.at_lower_edge = true;
  } else if (slope(hi) > 0.0) {
    out.alpha_star = hi;
    out.at_upper_edge = true;
  } else {
    while (hi - lo > kAlphaWidth) {
      const double mid = 0.5 * (lo + hi);
      if (slope(mid) > 0.0)
        lo = mid;
      else
        hi = mid;
    }
    out.alpha_star = 0.5 * (lo + hi);
  }

  const int n_t_max = static_cast<int>(std::floor(kAlphaMax * link.n));
  const double scaled = link.n * out.alpha_star;
  const int below = std::clamp(static_cast<int>(std::floor(scaled)), 1, n_t_max);
  const int above = std::clamp(static_cast<int>(std::ceil(scaled)), 1, n_t_max);
  out.n_t_star = below;
  if (above != below && lower_bound_at(link, above, eps) > lower_bound_at(link, below, eps) + kTieTol)
    out.n_t_star = above;
  return out;
}

double optimal_eps(const LinkSetting& link, int n_t) {
  auto objective = [&](double log10_eps) {
    const double eps = std::pow(10.0, log10_eps);
    const double v = lower_bound_at(link, n_t, eps);
    if (!std::isfinite(v)) {
      std::ostringstream msg;
      msg << "optimal_eps: non-finite objective at eps = " << eps;
      throw NumericalError(msg.str());
    }
    return v;
  };

  double lo = kLog10EpsMin;
  double hi = std::log10(0.5);
  while (hi - lo >= kLog10EpsWidth) {
    const double third = (hi - lo) / 3.0;
    const double m1 = lo + third;
    const double m2 = hi - third;
    if (objective(m1) < objective(m2))
      lo = m1;
    else
      hi = m2;
  }
  return std::pow(10.0, 0.5 * (lo + hi));
}

OptimResult alternate_optimize(const LinkSetting& link, const OptimOptions& opts) {
  if (!(opts.eps_init > 0.0 && opts.eps_init < 1.0))
    throw DomainError("alternate_optimize: eps_init must lie in (0,1)");
  if (opts.max_iter < 1) throw DomainError("alternate_optimize: max_iter must be >= 1");

  OptimResult res;
  double eps = opts.eps_init;
  std::optional<int> n_t;

  for (int it = 1; it <= opts.max_iter; ++it) {
    const AlphaResult pilot = optimal_alpha(link, eps);
    int candidate = pilot.n_t_star;
    if (n_t && lower_bound_at(link, *n_t, eps) >= lower_bound_at(link, candidate, eps))
      candidate = *n_t;
    n_t = candidate;
    res.boundary = pilot.at_upper_edge || pilot.at_lower_edge;
    const double ec_pilot = lower_bound_at(link, *n_t, eps);
    res.trace.push_back({it, HalfStep::kPilot, *n_t, eps, ec_pilot});

    const double eps_candidate = optimal_eps(link, *n_t);
    if (lower_bound_at(link, *n_t, eps_candidate) > ec_pilot) eps = eps_candidate;
    const double ec_eps = lower_bound_at(link, *n_t, eps);
    res.trace.push_back({it, HalfStep::kErrorProbability, *n_t, eps, ec_eps});

    if (ec_eps - ec_pilot <= opts.gap_tol) {
      res.n_t_star = *n_t;
      res.eps_star = eps;
      res.ec_star = ec_eps;
      res.ec_expint = ec_expint(make_params(link, *n_t, eps)).value;
      res.iterations = it;
      return res;
    }
  }

  std::ostringstream msg;
  msg << "alternate_optimize: no convergence within " << opts.max_iter << " iterations";
  throw OptimNotConverged(msg.str(), std::move(res.trace));
}

}  // namespace fblcap
