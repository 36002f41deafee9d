#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "nmc/flow.hpp"
#include "nmc/kernel.hpp"
#include "nmc/rng.hpp"
#include "nmc/stationary.hpp"
#include "nmc/testfunctions.hpp"

namespace nmc {

enum class SamplingMode { exact_flow, particle };

/// M trajectories of n+1 states each, flattened row-major.
struct TrajectoryBatch {
  std::vector<std::int32_t> states;
  int trajectories = 0;
  int length = 0;  // states per trajectory (n+1)
  std::uint64_t kernel_id = 0;
  MeasureVector mu0;
  SamplingMode mode = SamplingMode::exact_flow;
  int particle_count = 0;  // particle mode only

  std::span<const std::int32_t> trajectory(int i) const {
    return {states.data() + static_cast<std::size_t>(i) * length,
            static_cast<std::size_t>(length)};
  }
};

/// Precomputes per-step transition rows (cumulative form) along an exact
/// flow so repeated trajectory draws avoid re-evaluating the kernel.
class TrajectorySampler {
 public:
  /// Uses flow.measures[0..n-1]; throws FlowTooShort / KernelMismatch.
  TrajectorySampler(const NonlinearKernel& kernel, const LawFlow& flow, int n);

  /// X_0 ~ mu_0, X_{k+1} ~ row X_k of P^{mu_k}; inverse-CDF draws.
  std::vector<std::int32_t> sample(std::mt19937_64& eng) const;

  /// Same draw written into a preallocated span of length n+1.
  void sample_into(std::mt19937_64& eng, std::span<std::int32_t> out) const;

  int steps() const { return n_; }

 private:
  int d_ = 0;
  int n_ = 0;
  std::vector<double> mu0_cdf_;
  std::vector<double> step_row_cdfs_;  // n * d * d cumulative rows
};

/// Single trajectory against the exact deterministic law flow.
std::vector<std::int32_t> sample_trajectory(const NonlinearKernel& kernel,
                                            const LawFlow& flow,
                                            int n,
                                            std::mt19937_64& stream);

/// M independent trajectories with per-trajectory streams; bit-identical
/// output for equal (policy, parameters) at any thread count.
TrajectoryBatch sample_batch(const NonlinearKernel& kernel,
                             const LawFlow& flow,
                             int n,
                             int trajectories,
                             const RngPolicy& rng,
                             int threads = 0);

/// N-particle mean-field approximation: each step evaluates the kernel at
/// the ensemble's empirical measure. Contrast mode only; the exact-flow
/// sampler is the faithful construction.
struct ParticleSystemResult {
  std::vector<MeasureVector> empirical_path;  // length n+1
  TrajectoryBatch batch;
};

ParticleSystemResult particle_system(const NonlinearKernel& kernel,
                                     const MeasureVector& mu0,
                                     int particle_count,
                                     int n,
                                     std::mt19937_64& stream);

/// (sum_i (f(X_i) - center)) / sqrt(n) over all provided states.
double clt_statistic(std::span<const std::int32_t> states,
                     const ObservableF& f,
                     double center);

struct CltThresholds {
  double ks = 0.025;
  double g_gap = 0.02;
  double degenerate_atol = 1e-8;
};

struct GGap {
  std::string name;
  double empirical = 0.0;
  double expected = 0.0;
  double gap = 0.0;
};

struct CltReport {
  std::vector<double> samples;  // M values of S_n/sqrt(n)
  double sigma2_theoretical = 0.0;
  double ks_distance = 0.0;
  std::vector<GGap> g_gaps;
  long long n = 0;
  int trajectories = 0;
  bool degenerate = false;
  bool passed = false;
};

/// Precomputed stationary context for clt/lln verification.
struct StationaryContext {
  MeasureVector pi;
  double sigma2 = 0.0;
  bool tail_geometric = true;
  double fbar_sup_norm = 0.0;
  double center = 0.0;
};

StationaryContext make_stationary_context(const MeasureVector& pi,
                                          const VarianceReport& variance,
                                          const ObservableF& f);

/// Empirical CLT check: M samples of S_n/sqrt(n) (exact-flow mode, center
/// E_pi f), KS distance to N(0, sigma^2) and witness-function gaps. The
/// degenerate sigma^2 = 0 path compares against the point mass at 0 and
/// throws DegenerateRequiresExactZero when samples stray.
CltReport clt_verify(const NonlinearKernel& kernel,
                     const MeasureVector& mu0,
                     const ObservableF& f,
                     const StationaryContext& ctx,
                     long long n,
                     int trajectories,
                     const std::vector<TestFunction>& g_set,
                     const CltThresholds& thresholds,
                     const RngPolicy& rng,
                     int threads = 0);

struct LlnReport {
  double mean_abs = 0.0;  // mean |S_n/n|
  double max_abs = 0.0;
  double threshold = 0.0;
  long long n = 0;
  int trajectories = 0;
  bool passed = false;
};

/// |S_n/n| over M trajectories against a c/sqrt(n) schedule. The scale is
/// sigma when the covariance tail was geometric, else the sup norm of the
/// centered observable (a non-mixing chain must not borrow a CLT scale).
LlnReport lln_verify(const NonlinearKernel& kernel,
                     const MeasureVector& mu0,
                     const ObservableF& f,
                     const StationaryContext& ctx,
                     long long n,
                     int trajectories,
                     const RngPolicy& rng,
                     int threads = 0,
                     double sigma_multiple = 3.0);

/// Exact distribution of S_n/sqrt(n) by dynamic programming over
/// (state, partial sum) pairs along the exact flow. Guarded by |E|^n <= 1e7.
std::vector<std::pair<double, double>> exact_Sn_distribution(
    const NonlinearKernel& kernel,
    const MeasureVector& mu0,
    const ObservableF& f,
    double center,
    int n);

/// Kolmogorov-Smirnov distance of samples against N(0, sigma^2); the
/// sigma == 0 case measures against the unit step at 0.
double ks_distance_gaussian(std::span<const double> samples, double sigma);

/// Sup distance between an empirical CDF and a discrete distribution.
double ks_distance_discrete(std::span<const double> samples,
                            std::span<const std::pair<double, double>> atoms);

}  // namespace nmc
