#include "nmc/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "nmc/numerics.hpp"
#include "nmc/stochastic_matrix.hpp"

namespace nmc {

namespace {

// Rebuilds the last nonzero slot from the plain prefix sum so the plain
// left-to-right total lands on 1.0 exactly. For prefix in [0.5, 2] the
// subtraction 1.0 - prefix is exact (Sterbenz), and below 0.5 its rounding
// error is at most a half ulp of 1, so the final addition rounds to 1.0
// either way; trailing zeros add nothing and stay exactly zero. Iterative
// residual folding is not enough here: a half-ulp residual can straddle 1.0
// without ever landing on it.
void make_sum_exact(std::vector<double>& w) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::size_t j = w.size();
    while (j > 0 && w[j - 1] == 0.0) --j;
    if (j == 0) {  // all mass clamped away; unreachable past validation
      w.back() = 1.0;
      return;
    }
    double prefix = 0.0;
    for (std::size_t i = 0; i + 1 < j; ++i) prefix += w[i];
    const double last = 1.0 - prefix;
    if (last >= 0.0) {
      w[j - 1] = last;
      return;
    }
    // The prefix alone overshoots 1 by an ulp or two; shave it off the
    // largest leading entry and rebuild again.
    *std::max_element(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(j) - 1) += last;
  }
}

}  // namespace

MeasureVector::MeasureVector(std::vector<double> weights, double tolerance)
    : w_(std::move(weights)) {
  if (w_.empty()) {
    throw DimensionMismatch("MeasureVector: empty weight vector");
  }
  CompensatedSum total;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    if (w_[i] < -tolerance) {
      throw NegativeMass("MeasureVector: entry " + std::to_string(i) + " = " +
                         std::to_string(w_[i]) + " below -tolerance");
    }
    if (w_[i] < 0.0) w_[i] = 0.0;
    total.add(w_[i]);
  }
  const double sum = total.value();
  if (std::abs(sum - 1.0) > tolerance) {
    throw NotNormalized("MeasureVector: weights sum to " + std::to_string(sum));
  }
  for (double& v : w_) v /= sum;
  make_sum_exact(w_);
}

MeasureVector barycenter(int d) {
  return MeasureVector(std::vector<double>(static_cast<std::size_t>(d),
                                           1.0 / static_cast<double>(d)));
}

MeasureVector vertex(int d, int x) {
  if (x < 0 || x >= d) {
    throw DimensionMismatch("vertex: state " + std::to_string(x) +
                            " outside 0.." + std::to_string(d - 1));
  }
  std::vector<double> w(static_cast<std::size_t>(d), 0.0);
  w[static_cast<std::size_t>(x)] = 1.0;
  return MeasureVector(std::move(w));
}

MeasureVector validate_measure(std::span<const double> raw, double tolerance) {
  return MeasureVector(std::vector<double>(raw.begin(), raw.end()), tolerance);
}

double tv_distance(const MeasureVector& mu, const MeasureVector& nu) {
  if (mu.size() != nu.size()) {
    throw DimensionMismatch("tv_distance: sizes " + std::to_string(mu.size()) +
                            " vs " + std::to_string(nu.size()));
  }
  CompensatedSum acc;
  for (int x = 0; x < mu.size(); ++x) acc.add(std::abs(mu[x] - nu[x]));
  double tv = 0.5 * acc.value();
  if (tv < 0.0) tv = 0.0;
  if (tv > 1.0) tv = 1.0;
  return tv;
}

MeasureVector push_forward(const MeasureVector& mu, const StochasticMatrix& M) {
  if (mu.size() != M.size()) {
    throw DimensionMismatch("push_forward: measure size " +
                            std::to_string(mu.size()) + " vs matrix size " +
                            std::to_string(M.size()));
  }
  const int d = M.size();
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int y = 0; y < d; ++y) {
    CompensatedSum acc;
    for (int x = 0; x < d; ++x) acc.add(mu[x] * M(x, y));
    out[static_cast<std::size_t>(y)] = acc.value();
  }
  return MeasureVector(std::move(out));
}

}  // namespace nmc
