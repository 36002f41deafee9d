#include "nmc/numerics.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace nmc {

void CompensatedSum::add(double v) {
  double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

double compensated_total(std::span<const double> values) {
  CompensatedSum acc;
  for (double v : values) acc.add(v);
  return acc.value();
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("fit_line: need two equal-length samples");
  }
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }

  LineFit fit;
  fit.points = n;
  if (sxx <= 0.0) {
    fit.intercept = my;
    return fit;
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 1e-30) {
    // flat data: nothing to explain, report no fit quality
    fit.r_squared = 0.0;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  double r2 = 1.0 - ss_res / syy;
  if (r2 < 0.0) r2 = 0.0;
  if (r2 > 1.0) r2 = 1.0;
  fit.r_squared = r2;
  return fit;
}

double standard_normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865476);
}

double normal_cdf(double x, double sigma) {
  if (sigma <= 0.0) return x >= 0.0 ? 1.0 : 0.0;
  return standard_normal_cdf(x / sigma);
}

namespace {

// Value and derivative of the orthonormal Hermite polynomial of degree n.
void hermite_eval(int n, double x, double* value, double* derivative) {
  const double kQuarterPi = 0.7511255444649425;  // pi^{-1/4}
  double p0 = kQuarterPi;
  double p1 = kQuarterPi * std::sqrt(2.0) * x;
  for (int j = 2; j <= n; ++j) {
    double p2 = x * std::sqrt(2.0 / j) * p1 - std::sqrt((j - 1.0) / j) * p0;
    p0 = p1;
    p1 = p2;
  }
  *value = p1;
  *derivative = std::sqrt(2.0 * n) * p0;
}

}  // namespace

GaussHermiteRule gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: n must be positive");
  GaussHermiteRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));

  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    // Stroud-Secrest style initial guesses for the i-th largest root
    double x;
    if (i == 0) {
      x = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -1.0 / 6.0);
    } else if (i == 1) {
      x = rule.nodes[0] - 1.14 * std::pow(static_cast<double>(n), 0.426) / rule.nodes[0];
    } else if (i == 2) {
      x = 1.86 * rule.nodes[1] - 0.86 * rule.nodes[0];
    } else if (i == 3) {
      x = 1.91 * rule.nodes[2] - 0.91 * rule.nodes[1];
    } else {
      x = 2.0 * rule.nodes[static_cast<std::size_t>(i - 1)] -
          rule.nodes[static_cast<std::size_t>(i - 2)];
    }
    double value = 0.0, derivative = 1.0;
    for (int iter = 0; iter < 100; ++iter) {
      hermite_eval(n, x, &value, &derivative);
      const double dx = value / derivative;
      x -= dx;
      if (std::abs(dx) < 1e-15 * (1.0 + std::abs(x))) break;
    }
    hermite_eval(n, x, &value, &derivative);
    rule.nodes[static_cast<std::size_t>(i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = 2.0 / (derivative * derivative);
  }
  // mirror to the negative half-axis
  for (int i = 0; i < half; ++i) {
    rule.nodes[static_cast<std::size_t>(n - 1 - i)] = -rule.nodes[static_cast<std::size_t>(i)];
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = rule.weights[static_cast<std::size_t>(i)];
  }
  if (n % 2 == 1) rule.nodes[static_cast<std::size_t>(half - 1)] = 0.0;
  return rule;
}

}  // namespace nmc
