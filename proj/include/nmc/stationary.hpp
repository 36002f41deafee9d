#pragma once

#include <string>
#include <vector>

#include "nmc/measure.hpp"
#include "nmc/stochastic_matrix.hpp"

namespace nmc {

/// Bounded observable f: one real per state.
struct ObservableF {
  ObservableF(std::vector<double> values, std::string name = "f");

  std::vector<double> values;
  std::string name;
  double sup_norm = 0.0;

  int size() const { return static_cast<int>(values.size()); }
};

double stationary_mean(const MeasureVector& pi, const ObservableF& f);

/// sigma^2 = Var_pi(fbar) + 2 sum_{k>=1} Cov_pi(fbar(X_0), fbar(X_k)),
/// the limit of Var(S_n)/n for the stationary copy.
struct VarianceReport {
  double sigma2 = 0.0;
  double var0 = 0.0;
  std::vector<double> covariances;  // cov_k for k = 1..k_max
  int k_max = 0;
  double tail_bound = 0.0;  // bound on the neglected contribution to sigma2
  bool tail_geometric = false;  // false: k_cap hit without a geometric tail
  bool degenerate = false;      // sigma2 == 0 within tolerance
};

/// Covariance series with geometric-envelope truncation: stops once the
/// fitted envelope bounds the remaining tail below tail_tolerance. When no
/// geometric fit emerges by k_cap the report is returned with
/// tail_geometric=false and tail_bound = |cov_{k_cap}| * k_cap as a caveat.
VarianceReport asymptotic_variance(const StochasticMatrix& P_pi,
                                   const MeasureVector& pi,
                                   const ObservableF& f,
                                   double tail_tolerance = 1e-10,
                                   int k_cap = 10000);

/// beta(n) = sum_x pi(x) tv(P^n(x,.), pi) for the stationary chain, with the
/// standard alpha <= beta upper bound and Ibragimov-Linnik partial sums.
struct MixingProfile {
  std::vector<double> beta;         // n = 1..n_max
  std::vector<double> alpha_upper;  // = beta
  double zeta = 1.0;
  std::vector<double> il_partial_sums;  // partial sums of alpha(n)^{zeta/(2+zeta)}
  bool summable_diagnostic = false;     // geometric fit of beta succeeded
  double fit_ratio = 0.0;               // fitted geometric ratio of beta
  double fit_r_squared = 0.0;
  MeasureVector pi;
};

MixingProfile beta_mixing_profile(const StochasticMatrix& P_pi,
                                  const MeasureVector& pi,
                                  int n_max,
                                  double zeta = 1.0);

struct IlCheckResult {
  bool moment_finite = true;  // always, on a finite space with bounded f
  double moment_value = 0.0;  // E_pi |fbar|^{2+zeta}
  bool summable = false;      // geometric fit succeeded with ratio < 1
  double fit_ratio = 0.0;
  double partial_sum_last = 0.0;
  bool passed = false;        // moment_finite && summable
};

IlCheckResult ibragimov_linnik_check(const MixingProfile& profile,
                                     const ObservableF& f);

}  // namespace nmc
