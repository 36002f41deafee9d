#include "nmc/rng.hpp"

#include <cmath>

namespace nmc {

int sample_index(std::span<const double> row, double u) {
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t y = 0; y < row.size(); ++y) {
    if (row[y] > 0.0) last_positive = static_cast<int>(y);
    cum += row[y];
    if (u < cum && row[y] > 0.0) return static_cast<int>(y);
  }
  // u landed past the accumulated total by rounding
  if (last_positive >= 0) return last_positive;
  return static_cast<int>(row.size()) - 1;
}

MeasureVector random_simplex_point(int d, std::mt19937_64& eng) {
  std::vector<double> w(static_cast<std::size_t>(d));
  double sum = 0.0;
  for (double& v : w) {
    // exponential spacings; 1-u keeps the log argument in (0,1]
    v = -std::log(1.0 - canonical_double(eng));
    sum += v;
  }
  if (sum <= 0.0) return barycenter(d);
  for (double& v : w) v /= sum;
  return MeasureVector(std::move(w));
}

}  // namespace nmc
