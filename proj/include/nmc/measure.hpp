#pragma once

#include <span>
#include <vector>

#include "nmc/errors.hpp"
#include "nmc/state_space.hpp"

namespace nmc {

class StochasticMatrix;

/// Normalization tolerances: loose at ingestion, tight at rest.
inline constexpr double kIngestTolerance = 1e-9;
inline constexpr double kRestTolerance = 1e-12;

/// A point on the probability simplex. Immutable after construction; the
/// stored weights sum to exactly 1.0 under left-to-right double summation
/// (the residual is folded into the largest entry) so that downstream
/// dot products against constant observables are exact.
class MeasureVector {
 public:
  /// Empty placeholder (size 0); not a valid measure until assigned.
  MeasureVector() = default;

  /// Validates and normalizes. Entries in [-tolerance, 0) are clamped to 0.
  explicit MeasureVector(std::vector<double> weights,
                         double tolerance = kIngestTolerance);

  const std::vector<double>& weights() const { return w_; }
  double operator[](int x) const { return w_[static_cast<std::size_t>(x)]; }
  int size() const { return static_cast<int>(w_.size()); }

  friend bool operator==(const MeasureVector& a, const MeasureVector& b) {
    return a.w_ == b.w_;
  }

 private:
  std::vector<double> w_;
};

/// Uniform measure on d states.
MeasureVector barycenter(int d);

/// Point mass at state x.
MeasureVector vertex(int d, int x);

MeasureVector validate_measure(std::span<const double> raw, double tolerance);

/// Total variation distance, 1/2 * sum |mu - nu|, in [0,1].
double tv_distance(const MeasureVector& mu, const MeasureVector& nu);

/// Row-vector action mu * M.
MeasureVector push_forward(const MeasureVector& mu, const StochasticMatrix& M);

}  // namespace nmc
