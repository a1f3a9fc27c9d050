#pragma once

#include <vector>

#include "fblcap/errors.hpp"

namespace fblcap {

/// Operating point with the pilot length and error probability left free.
struct LinkSetting {
  int m = 5;
  double gamma0 = 1.0;
  double theta = 0.01;
  int n = 300;
};

inline constexpr double kAlphaMax = 0.2;
inline constexpr double kLog10EpsMin = -12.0;

struct AlphaResult {
  double alpha_star = 0.0;
  int n_t_star = 1;
  bool at_upper_edge = false;  // derivative still positive at alpha = 0.2
  bool at_lower_edge = false;  // derivative already negative at alpha = 1/n
};

/// Bisection on the sign of gamma_dalpha over (1/n, 0.2) down to a bracket of
/// width 1e-7, then the better of floor(n alpha*) and ceil(n alpha*) under the
/// closed-form lower bound (the smaller one on ties).
AlphaResult optimal_alpha(const LinkSetting& link, double eps);

/// Ternary search of the closed-form lower bound over log10(eps) on
/// [-12, log10 0.5] to a bracket narrower than 1e-3 decades.
double optimal_eps(const LinkSetting& link, int n_t);

enum class HalfStep { kPilot, kErrorProbability };

struct TraceEntry {
  int iteration = 0;
  HalfStep step = HalfStep::kPilot;
  int n_t = 0;
  double eps = 0.0;
  double objective = 0.0;  // closed-form lower bound after the half-step
};

struct OptimOptions {
  double eps_init = 1e-3;
  double gap_tol = 1e-4;  // bits/block
  int max_iter = 100;
};

struct OptimResult {
  int n_t_star = 0;
  double eps_star = 0.0;
  double ec_star = 0.0;    // closed-form lower bound at the optimum
  double ec_expint = 0.0;  // exponential-integral form at the same point
  int iterations = 0;
  bool boundary = false;   // last pilot step hit the edge of (0, 0.2)
  std::vector<TraceEntry> trace;
};

class OptimNotConverged : public ConvergenceError {
 public:
  OptimNotConverged(const std::string& what, std::vector<TraceEntry> trace)
      : ConvergenceError(what), trace_(std::move(trace)) {}
  const std::vector<TraceEntry>& trace() const { return trace_; }

 private:
  std::vector<TraceEntry> trace_;
};

/// Alternating maximization of the closed-form lower bound: pilot step at
/// fixed eps, then error-probability step at fixed n_t, until the second
/// half-step gains no more than gap_tol over the first.
///
/// A half-step keeps the incumbent value when its candidate does not improve
/// the objective, so the trace is non-decreasing. Throws OptimNotConverged
/// after max_iter iterations.
OptimResult alternate_optimize(const LinkSetting& link, const OptimOptions& opts = {});

}  // namespace fblcap
