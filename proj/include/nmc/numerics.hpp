#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace nmc {

/// Neumaier-compensated accumulator. Reduction results do not depend on how
/// work was split across threads as long as values are fed in index order.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double compensated_total(std::span<const double> values);

/// Ordinary least squares line y = intercept + slope * x.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;  // 0 when the y-values carry no variance
  std::size_t points = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

/// CDF of N(0,1) via erfc; relative error tracks the libm erfc (< 1e-12).
double standard_normal_cdf(double x);

/// CDF of N(0, sigma^2). sigma == 0 degenerates to the unit step at 0.
double normal_cdf(double x, double sigma);

/// Gauss-Hermite rule for weight exp(-x^2): integral f(x)exp(-x^2)dx
/// ~ sum w_i f(x_i). Nodes via Newton iteration on the Hermite recurrence.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

GaussHermiteRule gauss_hermite(int n);

/// E[g(eta)], eta ~ N(0, sigma^2), by the given Gauss-Hermite rule.
template <typename G>
double gaussian_expectation(const GaussHermiteRule& rule, double sigma, G&& g) {
  // substitution x = sqrt(2)*sigma*t maps to the GH weight; 1/sqrt(pi) factor
  const double kInvSqrtPi = 0.5641895835477562869;
  CompensatedSum acc;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    acc.add(rule.weights[i] * g(1.4142135623730951 * sigma * rule.nodes[i]));
  }
  return kInvSqrtPi * acc.value();
}

}  // namespace nmc
