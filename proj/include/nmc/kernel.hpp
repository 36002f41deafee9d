#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "nmc/measure.hpp"
#include "nmc/state_space.hpp"
#include "nmc/stochastic_matrix.hpp"

namespace nmc {

/// P(mu) = A for every mu: a classical homogeneous chain.
struct ConstantFamily {
  StochasticMatrix matrix;
};

/// P(mu) = (1-lambda) * A + lambda * ones ⊗ (mu Q): every row of the
/// feedback term equals the vector mu Q.
struct AffineMixtureFamily {
  StochasticMatrix base;
  StochasticMatrix feedback;
  double lambda = 0.0;
};

/// Entry (x,y) = c0[x][y] + sum_d sum_z c_d[x][y][z] * mu(z)^d, one
/// coefficient block per degree d = 1.., each of shape size^3.
struct PolynomialFamily {
  std::vector<double> constant_block;            // size*size, row-major
  std::vector<std::vector<double>> degree_blocks;  // each size*size*size
};

/// Measure-dependent transition kernel family P^mu. Construction checks
/// well-posedness on all simplex vertices plus the barycenter; the full
/// sweep is minorization_bound.
class NonlinearKernel {
 public:
  NonlinearKernel(StateSpace space, ConstantFamily family);
  NonlinearKernel(StateSpace space, AffineMixtureFamily family);
  NonlinearKernel(StateSpace space, PolynomialFamily family);

  const StateSpace& space() const { return space_; }
  const char* family_name() const;
  bool is_constant() const { return std::holds_alternative<ConstantFamily>(family_); }
  bool is_affine() const;

  const ConstantFamily* as_constant() const { return std::get_if<ConstantFamily>(&family_); }
  const AffineMixtureFamily* as_affine_mixture() const {
    return std::get_if<AffineMixtureFamily>(&family_);
  }
  const PolynomialFamily* as_polynomial() const {
    return std::get_if<PolynomialFamily>(&family_);
  }

  /// Identifies the kernel parameters; law flows and trajectory batches
  /// record it so mismatched kernel/flow pairs are detectable.
  std::uint64_t fingerprint() const { return fingerprint_; }
  std::string fingerprint_hex() const;

 private:
  StateSpace space_;
  std::variant<ConstantFamily, AffineMixtureFamily, PolynomialFamily> family_;
  std::uint64_t fingerprint_ = 0;
};

/// P^mu as a validated stochastic matrix. Throws RowNotStochastic when a
/// polynomial family is ill-posed at this mu.
StochasticMatrix evaluate(const NonlinearKernel& kernel, const MeasureVector& mu);

/// Estimate of inf_mu min_{x,y} P^mu_{x,y} with the witness point.
struct MinorizationReport {
  double lower_bound_estimate = 0.0;
  MeasureVector argmin_measure;
  int argmin_x = 0;
  int argmin_y = 0;
  int grid_resolution = 0;
  long long samples = 0;  // number of measures evaluated
  bool exact = false;     // true when the infimum is attained on vertices
};

/// For constant/affine families the infimum is exact (entries affine in mu,
/// extrema on vertices). Polynomial families sweep a regular simplex grid of
/// the given resolution plus extra seeded random points.
MinorizationReport minorization_bound(const NonlinearKernel& kernel,
                                      int grid_resolution,
                                      int extra_samples,
                                      std::uint64_t seed);

/// All compositions of `resolution` into `d` parts, scaled to the simplex.
std::vector<MeasureVector> simplex_grid(int d, int resolution);

}  // namespace nmc
