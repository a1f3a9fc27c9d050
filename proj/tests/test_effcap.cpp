#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "fblcap/effcap.hpp"
#include "fblcap/errors.hpp"
#include "fblcap/experiment.hpp"
#include "fblcap/optim.hpp"
#include "oracles.hpp"

using namespace fblcap;
using namespace fblcap::testing;

namespace {

SystemParams point(int m, double snr_db, int n_t, double eps, double theta = 0.01, int n = 300) {
  SystemParams p;
  p.theta = theta;
  p.n = n;
  p.n_t = n_t;
  p.m = m;
  p.gamma0 = db_to_linear(snr_db);
  p.eps = eps;
  return p;
}

}  // namespace

TEST_SUITE("effcap") {

TEST_CASE("ec_expint agrees with the quadrature route") {
  for (const auto& p : {point(1, 3.0, 10, 1e-4), point(5, 6.0, 20, 1e-5), point(7, 9.0, 40, 1e-3),
                        point(3, 0.0, 2, 0.05)}) {
    CAPTURE(p.m);
    CAPTURE(p.n_t);
    CHECK(std::abs(ec_expint(p).value / ec_by_quadrature(p) - 1.0) <= 1e-8);
  }
}

TEST_CASE("ec_expint at the 3 dB group operating point") {
  const auto p = point(5, 3.0, 19, 4.33e-6);
  const double cap = ec_cap(p.theta, p.eps);
  CHECK(cap == doctest::Approx(1234.99430159498756).epsilon(1e-12));
  const EcValue v = ec_expint(p);
  CHECK(v.method == EcMethod::kExpint);
  CHECK(v.ci_halfwidth == 0.0);
  CHECK(std::isfinite(v.value));
  CHECK(v.value > 0.0);
  CHECK(v.value < cap);
}

TEST_CASE("ec_expint and the bound vanish as eps approaches one") {
  const auto p = point(5, 6.0, 20, 1.0 - 1e-9);
  CHECK(std::abs(ec_expint(p).value) < 1e-6);
  CHECK(std::abs(ec_lower_bound(p).value) < 1e-6);
  CHECK(inner_t(p) == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("analytic forms require theta' n_d > 1") {
  const auto p = point(5, 6.0, 20, 1e-5, 0.001);  // theta' n_d ~ 0.40
  try {
    (void)ec_expint(p);
    FAIL("expected DomainError");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("theta' n_d") != std::string::npos);
  }
  CHECK_THROWS_AS(ec_lower_bound(p), DomainError);
  CHECK_THROWS_AS(inner_t(p), DomainError);
}

TEST_CASE("lower bound flags a loose regime") {
  const auto loose = point(5, 6.0, 20, 1e-5, 0.004);  // theta' n_d ~ 1.62
  const EcValue v = ec_lower_bound(loose);
  REQUIRE(v.warning.has_value());
  CHECK(v.warning->find("loose") != std::string::npos);
  CHECK(v.value <= ec_expint(loose).value);
  CHECK_FALSE(ec_lower_bound(point(5, 6.0, 20, 1e-5)).warning.has_value());
}

TEST_CASE("lower bound never exceeds the exponential-integral form") {
  for (double snr_db : {3.0, 6.0, 9.0})
    for (int m = 1; m <= 10; ++m)
      for (int n_t = 5; n_t <= 40; ++n_t)
        for (double eps : {2.02e-7, 4.33e-6, 7.92e-5, 1e-3}) {
          const auto p = point(m, snr_db, n_t, eps);
          REQUIRE(ec_lower_bound(p).value <= ec_expint(p).value);
        }
}

TEST_CASE("bound gap shrinks with transmit SNR") {
  auto gap = [](double snr_db) {
    const auto p = point(5, snr_db, 19, 4.33e-6);
    return ec_expint(p).value - ec_lower_bound(p).value;
  };
  CHECK(gap(6.0) < gap(3.0));
  CHECK(gap(9.0) < gap(6.0));
}

TEST_CASE("log-space evaluation survives extreme parameters") {
  auto p = point(10, 12.0, 20, 1e-10);
  CHECK(std::isfinite(ec_expint(p).value));
  p = point(50, 3.0, 100, 1e-200, 0.01, 3000);
  const double v = ec_expint(p).value;
  CHECK(std::isfinite(v));
  CHECK(v <= ec_cap(p.theta, p.eps) + 1e-9);
  CHECK(std::isfinite(ec_lower_bound(p).value));
}

TEST_CASE("inner_t relation, positivity and convexity in eps") {
  for (double snr_db : {3.0, 6.0, 9.0}) {
    std::vector<double> t;
    const auto grid = log_grid(1e-9, 1e-1, 41);
    for (double eps : grid) {
      const auto p = point(5, snr_db, 20, eps);
      const double value = inner_t(p);
      CHECK(value > 0.0);
      CHECK(ec_expint(p).value == doctest::Approx(-std::log(value) / p.theta).epsilon(1e-12));
      t.push_back(value);
    }
    // Convexity in eps on a non-uniform grid: the divided-difference slope is non-decreasing.
    for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
      const double left = (t[i] - t[i - 1]) / (grid[i] - grid[i - 1]);
      const double right = (t[i + 1] - t[i]) / (grid[i + 1] - grid[i]);
      CHECK(right - left >= -1e-9);
    }
  }
}

TEST_CASE("gamma_surrogate reference structure") {
  const double g = db_to_linear(6.0);
  // eps = 1/2 removes the dispersion penalty
  for (double a : {0.02, 0.1, 0.19}) {
    const double tp = 0.01 * kLog2e;
    const double snr = avg_received_snr(300 * a, g);
    CHECK(gamma_surrogate(5, g, a, 0.5, 0.01, 300) ==
          doctest::Approx(5 / 0.01 * std::log((tp * 300 * (1 - a) - 1) * snr + 1)).epsilon(1e-13));
  }
  std::vector<double> y;
  for (int k = 1; k <= 19; ++k) y.push_back(gamma_surrogate(5, g, 0.01 * k, 7.92e-5, 0.01, 300));
  for (double d2 : second_differences(y)) CHECK(d2 <= 1e-9);
}

TEST_CASE("gamma_surrogate maximizer maps to n_t near 18 at 6 dB") {
  const double g = db_to_linear(6.0);
  double best_alpha = 0.0, best = -1e300;
  for (int k = 1; k < 20000; ++k) {
    const double a = 0.2 * k / 20000.0;
    const double v = gamma_surrogate(5, g, a, 7.92e-5, 0.01, 300);
    if (v > best) {
      best = v;
      best_alpha = a;
    }
  }
  const double n_t = 300 * best_alpha;
  CHECK(n_t >= 17.0);
  CHECK(n_t <= 19.0);
}

TEST_CASE("gamma_surrogate rejects alpha outside the window") {
  const double g = 2.0;
  for (double a : {0.0, -0.01, 0.2, 0.25})
    CHECK_THROWS_AS(gamma_surrogate(5, g, a, 1e-5, 0.01, 300), DomainError);
  CHECK_THROWS_AS(gamma_surrogate(5, g, 0.1, 1e-5, 0.001, 300), DomainError);
  CHECK_THROWS_AS(gamma_dalpha(5, g, 0.2, 1e-5, 0.01, 300), DomainError);
}

TEST_CASE("gamma_dalpha matches central differences") {
  for (double snr_db : {3.0, 6.0, 9.0}) {
    const double g = db_to_linear(snr_db);
    for (double a : {0.02, 0.05, 0.09, 0.13, 0.18}) {
      auto f = [&](double x) { return gamma_surrogate(5, g, x, 7.92e-5, 0.01, 300); };
      const double fd = central_difference(f, a, 1e-6);
      const double an = gamma_dalpha(5, g, a, 7.92e-5, 0.01, 300);
      CAPTURE(a);
      CHECK(std::abs(an - fd) <= 1e-5 * std::abs(an));
    }
  }
}

TEST_CASE("gamma_dalpha is decreasing with a single sign change") {
  const double g = db_to_linear(6.0);
  double prev = 1e300;
  int sign_changes = 0;
  double prev_sign = 0.0;
  for (int k = 1; k < 200; ++k) {
    const double d = gamma_dalpha(5, g, 0.001 * k, 7.92e-5, 0.01, 300);
    CHECK(d < prev);
    if (prev_sign != 0.0 && (d > 0) != (prev_sign > 0)) ++sign_changes;
    prev_sign = d;
    prev = d;
  }
  CHECK(sign_changes == 1);
}

TEST_CASE("gamma_dalpha vanishes at the optimal pilot fraction") {
  const LinkSetting link{5, db_to_linear(6.0), 0.01, 300};
  const AlphaResult r = optimal_alpha(link, 7.92e-5);
  REQUIRE_FALSE(r.at_upper_edge);
  REQUIRE_FALSE(r.at_lower_edge);
  auto slope = [&](double a) { return gamma_dalpha(5, link.gamma0, a, 7.92e-5, 0.01, 300); };
  const double curvature = std::abs(central_difference(slope, r.alpha_star, 1e-5));
  // Bisection stops at a bracket of width 1e-7.
  CHECK(std::abs(slope(r.alpha_star)) <= curvature * 1e-7);
}

TEST_CASE("delay_violation") {
  CHECK(delay_violation(0.01, {300.0, 5.0, 0.0}) == 0.0);
  CHECK(delay_violation(0.01, {300.0, 0.0, 0.7}) == doctest::Approx(0.7).epsilon(1e-15));
  CHECK(delay_violation(0.01, {300.0, 5.0, 1.0}) ==
        doctest::Approx(3.05902320501825788e-07).epsilon(1e-12));
  CHECK(delay_violation(1e-9, {0.0, 5.0, 1.0}) <= 1.0);
  CHECK_THROWS_AS(delay_violation(0.01, {-1.0, 5.0, 1.0}), DomainError);
  CHECK_THROWS_AS(delay_violation(0.01, {1.0, 5.0, 1.5}), DomainError);
}

TEST_CASE("method tags") {
  CHECK(to_string(EcMethod::kExpint) == "expint");
  CHECK(to_string(EcMethod::kLowerBound) == "lower_bound");
  CHECK(to_string(EcMethod::kQuadrature) == "quadrature");
  CHECK(to_string(EcMethod::kMonteCarlo) == "monte_carlo");
  CHECK(ec_lower_bound(point(5, 6.0, 20, 1e-5)).method == EcMethod::kLowerBound);
}

}  // TEST_SUITE

TEST_SUITE("effcap properties") {

TEST_CASE("concave in the pilot length below a fifth of the block") {
  for (double snr_db : {3.0, 6.0, 9.0})
    for (int m : {1, 5, 7})
      for (double eps : {4.33e-6, 7.92e-5, 1e-3}) {
        std::vector<double> y;
        for (int n_t = 1; n_t < 60; ++n_t) y.push_back(ec_expint(point(m, snr_db, n_t, eps)).value);
        for (double d2 : second_differences(y)) CHECK(d2 <= 1e-9);
      }
}

TEST_CASE("increasing and concave in transmit power where G >= 0.5") {
  for (int m : {1, 3, 5, 7})
    for (int n_t : {10, 20})
      for (double eps : {1e-10, 1e-5}) {
        std::vector<double> expint, bound;
        for (double g = 0.8; g <= 40.0; g += 0.2) {
          auto p = point(m, 0.0, n_t, eps);
          p.gamma0 = g;
          REQUIRE(avg_received_snr(n_t, g) >= 0.5);
          expint.push_back(ec_expint(p).value);
          bound.push_back(ec_lower_bound(p).value);
        }
        for (std::size_t i = 1; i < expint.size(); ++i) {
          CHECK(expint[i] > expint[i - 1]);
          CHECK(bound[i] > bound[i - 1]);
        }
        for (double d2 : second_differences(expint)) CHECK(d2 <= 1e-9);
        for (double d2 : second_differences(bound)) CHECK(d2 <= 1e-9);
      }
}

TEST_CASE("increasing in the number of sub-channels, never above the cap") {
  for (double snr_db : {3.0, 6.0, 9.0, 12.0})
    for (double eps : {1e-10, 1e-5, 1e-3}) {
      double prev = -1e300;
      const double cap = ec_cap(0.01, eps);
      for (int m = 1; m <= 40; ++m) {
        const double v = ec_expint(point(m, snr_db, 20, eps)).value;
        // strictly increasing until the value saturates at the cap in double precision
        CHECK((v > prev || (v == prev && v >= cap * (1.0 - 1e-12))));
        CHECK(v <= cap + 1e-9);
        prev = v;
      }
      CHECK(prev > 0.9 * cap);
    }
}

TEST_CASE("unique interior maximizer in eps") {
  for (double snr_db : {3.0, 6.0, 9.0}) {
    std::vector<double> y;
    for (double eps : log_grid(1e-12, 0.5, 120)) y.push_back(ec_expint(point(5, snr_db, 19, eps)).value);
    CHECK(direction_changes(y) == 1);
    CHECK(y.front() < *std::max_element(y.begin(), y.end()));
    CHECK(y.back() < *std::max_element(y.begin(), y.end()));
  }
}

}  // TEST_SUITE
