#include "nmc/stochastic_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nmc/numerics.hpp"

namespace nmc {

namespace {

// Same exact-sum fixup as MeasureVector, applied per row: rebuild the last
// nonzero slot from the plain prefix sum, which puts the left-to-right row
// total on 1.0 exactly (Sterbenz above 0.5, half-ulp residual below).
void make_row_exact(double* row, std::size_t n) {
  for (int attempt = 0; attempt < 8; ++attempt) {
    std::size_t j = n;
    while (j > 0 && row[j - 1] == 0.0) --j;
    if (j == 0) {
      row[n - 1] = 1.0;
      return;
    }
    double prefix = 0.0;
    for (std::size_t i = 0; i + 1 < j; ++i) prefix += row[i];
    const double last = 1.0 - prefix;
    if (last >= 0.0) {
      row[j - 1] = last;
      return;
    }
    *std::max_element(row, row + j - 1) += last;
  }
}

}  // namespace

StochasticMatrix::StochasticMatrix(std::vector<double> rows, int size,
                                   double tolerance)
    : a_(std::move(rows)), n_(static_cast<std::size_t>(size)) {
  if (size < 1) {
    throw DimensionMismatch("StochasticMatrix: size must be positive");
  }
  if (a_.size() != n_ * n_) {
    throw DimensionMismatch("StochasticMatrix: " + std::to_string(a_.size()) +
                            " entries for size " + std::to_string(size));
  }
  for (std::size_t x = 0; x < n_; ++x) {
    double* row = a_.data() + x * n_;
    CompensatedSum total;
    for (std::size_t y = 0; y < n_; ++y) {
      if (row[y] < -tolerance) {
        throw RowNotStochastic("StochasticMatrix: entry (" + std::to_string(x) +
                               "," + std::to_string(y) + ") = " +
                               std::to_string(row[y]) + " is negative");
      }
      if (row[y] < 0.0) row[y] = 0.0;
      total.add(row[y]);
    }
    const double sum = total.value();
    if (std::abs(sum - 1.0) > tolerance) {
      throw RowNotStochastic("StochasticMatrix: row " + std::to_string(x) +
                             " sums to " + std::to_string(sum));
    }
    for (std::size_t y = 0; y < n_; ++y) row[y] /= sum;
    make_row_exact(row, n_);
  }
}

StochasticMatrix::StochasticMatrix(const std::vector<std::vector<double>>& rows,
                                   double tolerance)
    : StochasticMatrix(
          [&rows] {
            std::vector<double> flat;
            flat.reserve(rows.size() * rows.size());
            for (const auto& r : rows) {
              if (r.size() != rows.size()) {
                throw DimensionMismatch(
                    "StochasticMatrix: ragged rows (expected " +
                    std::to_string(rows.size()) + " entries, got " +
                    std::to_string(r.size()) + ")");
              }
              flat.insert(flat.end(), r.begin(), r.end());
            }
            return flat;
          }(),
          static_cast<int>(rows.size()), tolerance) {}

double StochasticMatrix::min_entry() const {
  return *std::min_element(a_.begin(), a_.end());
}

StochasticMatrix StochasticMatrix::identity(int size) {
  if (size < 1) {
    throw DimensionMismatch("StochasticMatrix::identity: size must be positive");
  }
  StochasticMatrix m;
  m.n_ = static_cast<std::size_t>(size);
  m.a_.assign(m.n_ * m.n_, 0.0);
  for (std::size_t i = 0; i < m.n_; ++i) m.a_[i * m.n_ + i] = 1.0;
  return m;
}

StochasticMatrix operator*(const StochasticMatrix& a, const StochasticMatrix& b) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("StochasticMatrix product: sizes " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  }
  const std::size_t n = a.n_;
  std::vector<double> out(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      CompensatedSum acc;
      for (std::size_t z = 0; z < n; ++z) acc.add(a.a_[x * n + z] * b.a_[z * n + y]);
      out[x * n + y] = acc.value();
    }
  }
  return StochasticMatrix(std::move(out), static_cast<int>(n), 1e-9);
}

double dobrushin_coefficient(const StochasticMatrix& M) {
  const int d = M.size();
  double worst = 0.0;
  for (int x = 0; x < d; ++x) {
    for (int xp = x + 1; xp < d; ++xp) {
      double s = 0.0;
      for (int y = 0; y < d; ++y) s += std::abs(M(x, y) - M(xp, y));
      worst = std::max(worst, 0.5 * s);
    }
  }
  return std::min(worst, 1.0);
}

}  // namespace nmc
