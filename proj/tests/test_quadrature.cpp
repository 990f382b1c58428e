#include <cmath>
#include <tuple>
#include <vector>

#include <doctest.h>

#include "riskbounds/quadrature.hpp"

using namespace riskbounds::quad;

TEST_CASE("Gauss-Legendre rules are exact up to degree 2n-1") {
  for (int n : {1, 2, 5, 8}) {
    const Rule& r = gauss_legendre(n);
    REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
    for (int p = 0; p <= 2 * n - 1; ++p) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], p);
      const double exact = p % 2 ? 0.0 : 2.0 / (p + 1);
      CHECK(s == doctest::Approx(exact).epsilon(1e-14));
    }
  }
}

TEST_CASE("log-domain helpers") {
  CHECK(log_add(std::log(2.0), std::log(3.0)) == doctest::Approx(std::log(5.0)).epsilon(1e-15));
  CHECK(log_add(kNegInf, 1.5) == 1.5);
  CHECK(log_add(kNegInf, kNegInf) == kNegInf);
  CHECK(log_add(1000.0, 1000.0) == doctest::Approx(1000.0 + std::log(2.0)).epsilon(1e-15));

  using Case = std::tuple<double, double, double>;
  for (auto [f0, f1, dt] : {Case{0.0, 1.0, 2.0}, Case{3.0, -2.0, 0.5}, Case{1.0, 1.0, 3.0}, Case{700.0, 800.0, 1.0}}) {
    const double exact = f0 == f1 ? f0 + std::log(dt)
                                  : f0 + std::log(dt) + std::log(std::expm1(f1 - f0) / (f1 - f0));
    CHECK(log_exp_linear(f0, f1, dt) == doctest::Approx(exact).epsilon(1e-13));
  }

  const LogSigned a = LogSigned::from_value(5.0), b = LogSigned::from_value(-3.0);
  CHECK((a + b).value() == doctest::Approx(2.0).epsilon(1e-15));
  CHECK((b + b).value() == doctest::Approx(-6.0).epsilon(1e-15));
  CHECK((a + LogSigned::from_value(-5.0)).sign == 0);
  const LogSigned huge = LogSigned::from_log(2000.0);
  CHECK((huge + huge).log_abs == doctest::Approx(2000.0 + std::log(2.0)).epsilon(1e-15));
}

TEST_CASE("pairwise summation") {
  std::vector<double> v(1000, 0.1);
  CHECK(pairwise_sum(v) == doctest::Approx(100.0).epsilon(1e-14));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}

TEST_CASE("Hermite reproduces cubics, PCHIP preserves monotonicity") {
  auto f = [](double t) { return 1.0 - 2.0 * t + 0.5 * t * t * t; };
  auto df = [](double t) { return -2.0 + 1.5 * t * t; };
  for (double t : {0.3, 0.55, 1.1})
    CHECK(hermite(0.3, 1.1, f(0.3), f(1.1), df(0.3), df(1.1), t) == doctest::Approx(f(t)).epsilon(1e-14));

  const std::vector<double> ts{0, 1, 2, 3, 4}, ys{0, 0, 1, 1, 1};
  double prev = -1.0;
  for (double t = 0.0; t <= 4.0; t += 0.01) {
    const double y = pchip(ts, ys, t);
    CHECK(y >= prev - 1e-15);
    CHECK(y >= -1e-15);
    CHECK(y <= 1.0 + 1e-15);
    prev = y;
  }
  const std::vector<double> lin{1, 3, 5, 7, 9};
  CHECK(pchip(ts, lin, 2.5) == doctest::Approx(6.0).epsilon(1e-15));
}
