#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nmc/kernel.hpp"
#include "nmc/measure.hpp"

namespace nmc {

/// The deterministic law flow mu_0, mu_1, ... with mu_{k+1} = mu_k P^{mu_k}.
struct LawFlow {
  std::vector<MeasureVector> measures;
  std::uint64_t kernel_id = 0;
  std::vector<double> tv_to_invariant;  // empty until filled against a pi

  int steps() const { return static_cast<int>(measures.size()) - 1; }
};

LawFlow iterate_law(const NonlinearKernel& kernel, const MeasureVector& mu0, int n);

/// Fills flow.tv_to_invariant with tv(mu_k, pi).
void fill_tv_to_invariant(LawFlow& flow, const MeasureVector& pi);

struct InvariantResult {
  MeasureVector pi;
  double residual = 0.0;  // tv(pi, pi P^pi)
  long long iterations = 0;  // iterations of the start that produced pi
  std::vector<std::pair<MeasureVector, MeasureVector>> starts;  // (start, limit)
  bool unique_within_tolerance = false;
  bool converged = false;  // every start met the tolerance
};

/// Thrown when some start exceeded max_iters; carries the partial result.
struct NotConverged : Error {
  NotConverged(const std::string& what, InvariantResult partial_result)
      : Error(what), partial(std::move(partial_result)) {}
  InvariantResult partial;
};

/// Multi-start fixed-point iteration of the law map. Default starts are all
/// simplex vertices plus the barycenter; pi is the limit of the last start
/// (the barycenter under the default). Multiple fixed points are not an
/// error: unique_within_tolerance turns false with every limit reported.
/// damping theta in (0,1] applies mu <- (1-theta) mu + theta mu P^mu.
InvariantResult find_invariant(const NonlinearKernel& kernel,
                               double tolerance = 1e-12,
                               long long max_iters = 200000,
                               std::vector<MeasureVector> starts = {},
                               double damping = 1.0);

/// Exponential-rate fit tv_k ~ exp(lnK - C k) by least squares on ln tv.
struct RateFit {
  double C = 0.0;
  double lnK = 0.0;
  double r_squared = 0.0;
  int window_begin = 0;
  int window_end = 0;  // inclusive
};

/// Fits on steps with tv above the 1e-13 floor; requires at least 4 usable
/// points, else InsufficientDecay.
RateFit fit_rate(const LawFlow& flow, const MeasureVector& pi);

/// Per-step check of the kernel-ratio envelope along a flow.
struct KernelRatioStep {
  double ratio = 0.0;  // max_{x,y} |P^{mu_n}_{x,y} / P^pi_{x,y} - 1|
  double bound = 0.0;  // exp(lnK - C n)
  bool holds = false;
};

struct KernelRatioReport {
  std::vector<KernelRatioStep> steps;
  std::optional<int> first_violation;
  double C = 0.0;
  double lnK = 0.0;
};

/// Requires every entry of P^pi positive (ZeroInvariantEntry otherwise).
KernelRatioReport kernel_ratio_bounds(const NonlinearKernel& kernel,
                                      const LawFlow& flow,
                                      const MeasureVector& pi,
                                      double C,
                                      double lnK);

/// k-step kernel Q^{mu0,k} = P^{mu_0} P^{mu_1} ... P^{mu_{k-1}} along the
/// exact flow from mu0; satisfies mu_k = mu_0 Q^{mu0,k}.
StochasticMatrix k_step_kernel(const NonlinearKernel& kernel,
                               const MeasureVector& mu0,
                               int k);

}  // namespace nmc
