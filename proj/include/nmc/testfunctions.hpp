#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "nmc/numerics.hpp"

namespace nmc {

/// Bounded continuous witness function g with its Gaussian expectation.
/// The verification path always evaluates E[g(eta)] by 64-point
/// Gauss-Hermite quadrature; closed forms, where known, back the unit tests.
struct TestFunction {
  std::string name;
  std::function<double(double)> g;
  // E[g(eta)], eta ~ N(0, sigma^2), when available in closed form
  std::function<double(double sigma)> closed_form;

  bool has_closed_form() const { return static_cast<bool>(closed_form); }
};

/// Built-in catalog: cos(t x) for t in {0.5, 1, 2} (E = exp(-t^2 sigma^2/2)),
/// a shifted logistic, a clipped square min(x^2, 4), and a clipped absolute
/// value min(|x|, 3).
const std::vector<TestFunction>& default_test_functions();

/// E[g(eta)] by 64-point Gauss-Hermite quadrature.
double gaussian_expectation_gh64(const TestFunction& tf, double sigma);

}  // namespace nmc
