#include <cmath>
#include <vector>

#include "doctest.h"
#include "nmc/numerics.hpp"
#include "oracles.hpp"

using namespace nmc;

TEST_CASE("compensated sum survives catastrophic cancellation") {
  CompensatedSum s;
  s.add(1e16);
  s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1.0);  // naive accumulation gives 0 here

  const std::vector<double> v{1e16, 1.0, -1e16};
  CHECK(compensated_total(v) == 1.0);
}

TEST_CASE("compensated sum of many small terms") {
  CompensatedSum s;
  for (int i = 0; i < 10; ++i) s.add(0.1);
  CHECK(s.value() == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("fit_line recovers an exact line") {
  std::vector<double> xs, ys;
  for (int i = 0; i < 10; ++i) {
    xs.push_back(static_cast<double>(i));
    ys.push_back(3.0 - 2.0 * i);
  }
  const LineFit fit = fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(fit.intercept == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(fit.r_squared == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.points == 10);
}

TEST_CASE("fit_line on constant data reports zero slope") {
  const std::vector<double> xs{0.0, 1.0, 2.0, 3.0};
  const std::vector<double> ys{5.0, 5.0, 5.0, 5.0};
  const LineFit fit = fit_line(xs, ys);
  CHECK(fit.slope == doctest::Approx(0.0));
  CHECK(fit.intercept == doctest::Approx(5.0));
}

TEST_CASE("standard normal cdf reference values") {
  CHECK(standard_normal_cdf(0.0) == 0.5);
  CHECK(standard_normal_cdf(1.0) == doctest::Approx(0.8413447460685429).epsilon(1e-14));
  CHECK(standard_normal_cdf(-1.96) == doctest::Approx(0.024997895148220435).epsilon(1e-12));
  for (double x : {0.3, 1.1, 2.7, 4.0}) {
    CHECK(standard_normal_cdf(x) + standard_normal_cdf(-x) ==
          doctest::Approx(1.0).epsilon(1e-15));
  }
}

TEST_CASE("normal_cdf degenerates to the unit step at sigma 0") {
  CHECK(normal_cdf(-1.0, 0.0) == 0.0);
  CHECK(normal_cdf(0.0, 0.0) == 1.0);
  CHECK(normal_cdf(1.0, 0.0) == 1.0);
  CHECK(normal_cdf(1.0, 2.0) == doctest::Approx(standard_normal_cdf(0.5)));
}

TEST_CASE("Gauss-Hermite rule integrates gaussian moments") {
  const GaussHermiteRule rule = gauss_hermite(64);
  REQUIRE(rule.nodes.size() == 64);

  double weight_sum = 0.0;
  for (double w : rule.weights) weight_sum += w;
  CHECK(weight_sum == doctest::Approx(std::sqrt(3.141592653589793)).epsilon(1e-13));

  const double sigma = 1.7;
  const double m2 = gaussian_expectation(rule, sigma, [](double x) { return x * x; });
  CHECK(m2 == doctest::Approx(sigma * sigma).epsilon(1e-12));

  const double m4 = gaussian_expectation(rule, sigma, [](double x) { return x * x * x * x; });
  CHECK(m4 == doctest::Approx(3.0 * sigma * sigma * sigma * sigma).epsilon(1e-12));

  const double t = 1.3;
  const double ec = gaussian_expectation(rule, sigma, [&](double x) { return std::cos(t * x); });
  CHECK(ec == doctest::Approx(std::exp(-0.5 * t * t * sigma * sigma)).epsilon(1e-12));
}

TEST_CASE("Gauss-Hermite agrees with a direct quadrature oracle") {
  const GaussHermiteRule rule = gauss_hermite(64);
  const double sigma = 0.9;
  auto g = [](double x) { return 1.0 / (1.0 + std::exp(-x)) + 0.2 * x * x; };
  const double gh = gaussian_expectation(rule, sigma, g);
  const double simpson = oracle::gaussian_expectation_simpson(sigma, g);
  CHECK(gh == doctest::Approx(simpson).epsilon(1e-10));
}
