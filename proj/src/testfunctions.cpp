#include "nmc/testfunctions.hpp"

#include <algorithm>
#include <cmath>

namespace nmc {

namespace {

TestFunction make_cos(double t) {
  TestFunction tf;
  tf.name = "cos_" + std::to_string(t).substr(0, 3) + "x";
  tf.g = [t](double x) { return std::cos(t * x); };
  // E[cos(t eta)] is the Gaussian characteristic function
  tf.closed_form = [t](double sigma) {
    return std::exp(-0.5 * t * t * sigma * sigma);
  };
  return tf;
}

std::vector<TestFunction> build_catalog() {
  std::vector<TestFunction> catalog;
  catalog.push_back(make_cos(0.5));
  catalog.push_back(make_cos(1.0));
  catalog.push_back(make_cos(2.0));

  TestFunction logistic;
  logistic.name = "logistic_shift";
  logistic.g = [](double x) { return 1.0 / (1.0 + std::exp(-(x - 0.5))); };
  catalog.push_back(std::move(logistic));

  TestFunction clipped_square;
  clipped_square.name = "clipped_square";
  clipped_square.g = [](double x) { return std::min(x * x, 4.0); };
  catalog.push_back(std::move(clipped_square));

  TestFunction clipped_abs;
  clipped_abs.name = "clipped_abs";
  clipped_abs.g = [](double x) { return std::min(std::abs(x), 3.0); };
  catalog.push_back(std::move(clipped_abs));

  return catalog;
}

}  // namespace

const std::vector<TestFunction>& default_test_functions() {
  static const std::vector<TestFunction> catalog = build_catalog();
  return catalog;
}

double gaussian_expectation_gh64(const TestFunction& tf, double sigma) {
  static const GaussHermiteRule rule = gauss_hermite(64);
  return gaussian_expectation(rule, sigma, tf.g);
}

}  // namespace nmc
