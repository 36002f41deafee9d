#pragma once

#include <span>
#include <vector>

#include "nmc/errors.hpp"

namespace nmc {

/// Dense row-stochastic matrix. Rows are renormalized to an exact unit sum
/// at construction; every entry is non-negative.
class StochasticMatrix {
 public:
  /// rows: flattened row-major size*size entries.
  StochasticMatrix(std::vector<double> rows, int size, double tolerance = 1e-9);

  /// Convenience constructor from nested rows.
  explicit StochasticMatrix(const std::vector<std::vector<double>>& rows,
                            double tolerance = 1e-9);

  int size() const { return static_cast<int>(n_); }
  double operator()(int x, int y) const {
    return a_[static_cast<std::size_t>(x) * n_ + static_cast<std::size_t>(y)];
  }
  std::span<const double> row(int x) const {
    return {a_.data() + static_cast<std::size_t>(x) * n_,
            static_cast<std::size_t>(n_)};
  }
  const std::vector<double>& data() const { return a_; }

  double min_entry() const;

  /// Identity matrix of the given size.
  static StochasticMatrix identity(int size);

  /// Matrix product (both row-stochastic, same size).
  friend StochasticMatrix operator*(const StochasticMatrix& a,
                                    const StochasticMatrix& b);

 private:
  StochasticMatrix() = default;
  std::vector<double> a_;
  std::size_t n_ = 0;
};

/// Dobrushin ergodicity coefficient: 1/2 * max_{x,x'} sum_y |M_xy - M_x'y|.
/// Zero iff all rows coincide.
double dobrushin_coefficient(const StochasticMatrix& M);

}  // namespace nmc
