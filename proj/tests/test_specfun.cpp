#include <doctest.h>

#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "fblcap/errors.hpp"
#include "fblcap/specfun.hpp"
#include "oracles.hpp"

using namespace fblcap;
using namespace fblcap::testing;

TEST_SUITE("specfun") {

TEST_CASE("q_func reference values and symmetry") {
  CHECK(q_func(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(q_func(4.2649) == doctest::Approx(kQAt4_2649).epsilon(1e-12));
  for (double x : {-7.5, -3.0, -0.4, 0.0, 0.3, 1.7, 5.0, 8.0})
    CHECK(q_func(x) == doctest::Approx(1.0 - q_func(-x)).epsilon(1e-14));
}

TEST_CASE("q_func is decreasing and inside (0,1)") {
  double prev = 1.0;
  for (double x = -8.0; x <= 8.0; x += 0.25) {
    const double q = q_func(x);
    CHECK(q > 0.0);
    CHECK(q < 1.0);
    CHECK(q < prev);
    prev = q;
  }
}

TEST_CASE("q_inv reference values") {
  CHECK(q_inv(0.5) == 0.0);
  CHECK(q_inv(1e-5) == doctest::Approx(kQInv1e5).epsilon(1e-10));
  for (double p : {1e-9, 0.01, 0.2, 0.45})
    CHECK(q_inv(p) == doctest::Approx(-q_inv(1.0 - p)).epsilon(1e-9));
}

TEST_CASE("q_inv sign follows p relative to one half") {
  for (double p : {1e-12, 1e-3, 0.3, 0.4999})
    CHECK(q_inv(p) > 0.0);
  for (double p : {0.5001, 0.8, 0.999})
    CHECK(q_inv(p) < 0.0);
}

TEST_CASE("q_inv round trip on a log grid") {
  for (double p : log_grid(1e-12, 0.5, 60))
    CHECK(std::abs(q_func(q_inv(p)) / p - 1.0) <= 1e-9);
}

TEST_CASE("q_inv rejects the closed endpoints") {
  for (double p : {0.0, 1.0, -0.1, 1.5, std::numeric_limits<double>::quiet_NaN()})
    CHECK_THROWS_AS(q_inv(p), DomainError);
}

TEST_CASE("expint_v at x = 0 is 1/(v-1)") {
  for (double v : {1.001, 1.5, 2.0, 4.04, 37.0})
    CHECK(expint_v(v, 0.0) == doctest::Approx(1.0 / (v - 1.0)).epsilon(1e-15));
}

TEST_CASE("expint_v matches the quadrature reference value") {
  CHECK(expint_v(2.0, 1.0) == doctest::Approx(kExpint2At1).epsilon(1e-10));
  CHECK(expint_by_quadrature(2.0, 1.0) == doctest::Approx(kExpint2At1).epsilon(1e-11));
}

TEST_CASE("expint_v agrees with its defining integral") {
  const std::vector<double> orders = {1.0001, 1.5, 2.0, 2.0 + 1e-9, 3.0 - 1e-5, 4.04, 7.3, 10.0, 25.5};
  const std::vector<double> args = {1e-4, 0.05, 0.3, 0.999, 1.0, 1.001, 2.5, 5.0, 30.0};
  for (double v : orders)
    for (double x : args) {
      CAPTURE(v);
      CAPTURE(x);
      CHECK(std::abs(expint_v(v, x) / expint_by_quadrature(v, x) - 1.0) <= 1e-10);
    }
}

TEST_CASE("expint_v upper bound exp(-x)/(v+x-1) holds and tightens") {
  const std::vector<double> orders = {1.0001, 1.5, 2.0, 4.04, 10.0};
  const std::vector<double> args = {0.05, 0.3, 1.0, 5.0};
  for (double v : orders)
    for (double x : args) CHECK(expint_v(v, x) <= std::exp(-x) / (v + x - 1.0));
  auto ratio = [](double v, double x) { return expint_v(v, x) * (v + x - 1.0) / std::exp(-x); };
  CHECK(ratio(10.0, 5.0) > ratio(4.04, 1.0));
  CHECK(ratio(4.04, 1.0) > ratio(1.5, 0.05));
  CHECK(ratio(10.0, 5.0) > 0.95);
}

TEST_CASE("expint_v is decreasing in order and argument") {
  const std::vector<double> orders = {1.5, 2.0, 4.04, 10.0};
  const std::vector<double> args = {0.05, 0.3, 1.0, 5.0};
  for (std::size_t i = 0; i < orders.size(); ++i)
    for (std::size_t j = 0; j < args.size(); ++j) {
      if (i + 1 < orders.size()) CHECK(expint_v(orders[i + 1], args[j]) < expint_v(orders[i], args[j]));
      if (j + 1 < args.size()) CHECK(expint_v(orders[i], args[j + 1]) < expint_v(orders[i], args[j]));
    }
}

TEST_CASE("expint_v_scaled survives large arguments") {
  const double v = 4.04;
  for (double x : {0.5, 3.0, 50.0}) CHECK(expint_v_scaled(v, x) == doctest::Approx(std::exp(x) * expint_v(v, x)).epsilon(1e-13));
  const double big = expint_v_scaled(v, 900.0);
  CHECK(std::isfinite(big));
  CHECK(big == doctest::Approx(1.0 / (900.0 + v)).epsilon(1e-4));
}

TEST_CASE("expint_v domain errors") {
  CHECK_THROWS_AS(expint_v(1.0, 0.5), DomainError);
  CHECK_THROWS_AS(expint_v(0.5, 0.5), DomainError);
  CHECK_THROWS_AS(expint_v(2.0, -1e-3), DomainError);
  CHECK_THROWS_AS(expint_v_scaled(2.0, std::numeric_limits<double>::infinity()), DomainError);
}

TEST_CASE("expint_v is reentrant") {
  std::vector<double> results(8);
  {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < results.size(); ++i)
      pool.emplace_back([&, i] { results[i] = expint_v(3.3, 0.01 + 0.1 * i); });
  }
  for (std::size_t i = 0; i < results.size(); ++i)
    CHECK(results[i] == expint_v(3.3, 0.01 + 0.1 * i));
}

TEST_CASE("quad_oracle basic integrals") {
  CHECK(quad_oracle([](double t) { return std::exp(-t); }, {}) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(quad_oracle([](double) { return 0.0; }, {}) == 0.0);
  CHECK(quad_oracle([](double t) { return std::exp(-t) * std::pow(t, -2.0); }, {}, 1.0) ==
        doctest::Approx(expint_v(2.0, 1.0)).epsilon(1e-11));
}

TEST_CASE("quad_oracle fails loudly") {
  // 1/(1+t) is not integrable on [0, inf)
  CHECK_THROWS_AS(quad_oracle([](double t) { return 1.0 / (1.0 + t); }, {1e-12, 0.0, 6}),
                  ConvergenceError);
  CHECK_THROWS_AS(quad_oracle([](double t) { return std::exp(-t); }, {0.0, 0.0, 10}), DomainError);
  CHECK_THROWS_AS(quad_oracle([](double t) { return std::exp(-t); }, {1e-8, 0.0, 0}), DomainError);
}

}  // TEST_SUITE
