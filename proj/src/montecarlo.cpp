#include "nmc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <thread>

#include "nmc/numerics.hpp"

namespace nmc {

namespace {

// First index with u < cdf[i]; rounding that pushes u past the total falls
// back to the last index carrying mass.
int pick_from_cdf(const double* cdf, int d, double u) {
  for (int i = 0; i < d; ++i) {
    if (u < cdf[i]) return i;
  }
  for (int i = d - 1; i > 0; --i) {
    if (cdf[i] > cdf[i - 1]) return i;
  }
  return 0;
}

int resolve_threads(int threads, long long work_items) {
  int t = threads;
  if (t <= 0) {
    const unsigned hw = std::thread::hardware_concurrency();
    t = hw == 0 ? 1 : static_cast<int>(hw);
  }
  if (static_cast<long long>(t) > work_items) t = static_cast<int>(work_items);
  return std::max(t, 1);
}

// Runs fn(i) for i in [0, count) split into contiguous per-thread chunks.
// fn must touch only index-i state so the schedule cannot affect results.
template <typename Fn>
void parallel_for(long long count, int threads, Fn&& fn) {
  const int t = resolve_threads(threads, count);
  if (t <= 1) {
    for (long long i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(t));
  const long long chunk = (count + t - 1) / t;
  for (int w = 0; w < t; ++w) {
    const long long begin = static_cast<long long>(w) * chunk;
    const long long end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([begin, end, &fn] {
      for (long long i = begin; i < end; ++i) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

TrajectorySampler::TrajectorySampler(const NonlinearKernel& kernel,
                                     const LawFlow& flow, int n) {
  if (n < 0) throw Error("TrajectorySampler: n must be >= 0");
  if (flow.kernel_id != kernel.fingerprint()) {
    throw KernelMismatch("TrajectorySampler: flow was generated by kernel " +
                         std::to_string(flow.kernel_id) + ", got " +
                         std::to_string(kernel.fingerprint()));
  }
  if (flow.measures.size() < static_cast<std::size_t>(n) + 1) {
    throw FlowTooShort("TrajectorySampler: flow has " +
                       std::to_string(flow.measures.size()) +
                       " measures, need " + std::to_string(n + 1));
  }
  d_ = kernel.space().size();
  n_ = n;
  const std::size_t d = static_cast<std::size_t>(d_);
  if (static_cast<double>(n) * static_cast<double>(d * d) > 2e8) {
    throw TooLarge("TrajectorySampler: per-step transition table exceeds 2e8 "
                   "doubles");
  }

  mu0_cdf_.resize(d);
  double cum = 0.0;
  for (std::size_t y = 0; y < d; ++y) {
    cum += flow.measures[0][static_cast<int>(y)];
    mu0_cdf_[y] = cum;
  }

  step_row_cdfs_.resize(static_cast<std::size_t>(n) * d * d);
  for (int k = 0; k < n; ++k) {
    const StochasticMatrix P = evaluate(kernel, flow.measures[static_cast<std::size_t>(k)]);
    for (std::size_t x = 0; x < d; ++x) {
      double* out = step_row_cdfs_.data() + (static_cast<std::size_t>(k) * d + x) * d;
      double c = 0.0;
      for (std::size_t y = 0; y < d; ++y) {
        c += P(static_cast<int>(x), static_cast<int>(y));
        out[y] = c;
      }
    }
  }
}

void TrajectorySampler::sample_into(std::mt19937_64& eng,
                                    std::span<std::int32_t> out) const {
  if (out.size() != static_cast<std::size_t>(n_) + 1) {
    throw DimensionMismatch("TrajectorySampler: output span of size " +
                            std::to_string(out.size()) + ", want " +
                            std::to_string(n_ + 1));
  }
  const std::size_t d = static_cast<std::size_t>(d_);
  int x = pick_from_cdf(mu0_cdf_.data(), d_, canonical_double(eng));
  out[0] = static_cast<std::int32_t>(x);
  for (int k = 0; k < n_; ++k) {
    const double* row =
        step_row_cdfs_.data() + (static_cast<std::size_t>(k) * d + static_cast<std::size_t>(x)) * d;
    x = pick_from_cdf(row, d_, canonical_double(eng));
    out[static_cast<std::size_t>(k) + 1] = static_cast<std::int32_t>(x);
  }
}

std::vector<std::int32_t> TrajectorySampler::sample(std::mt19937_64& eng) const {
  std::vector<std::int32_t> out(static_cast<std::size_t>(n_) + 1);
  sample_into(eng, out);
  return out;
}

std::vector<std::int32_t> sample_trajectory(const NonlinearKernel& kernel,
                                            const LawFlow& flow,
                                            int n,
                                            std::mt19937_64& stream) {
  return TrajectorySampler(kernel, flow, n).sample(stream);
}

TrajectoryBatch sample_batch(const NonlinearKernel& kernel,
                             const LawFlow& flow,
                             int n,
                             int trajectories,
                             const RngPolicy& rng,
                             int threads) {
  if (trajectories < 1) throw Error("sample_batch: trajectories must be >= 1");
  const TrajectorySampler sampler(kernel, flow, n);
  const std::size_t length = static_cast<std::size_t>(n) + 1;
  if (static_cast<double>(trajectories) * static_cast<double>(length) > 1.5e8) {
    throw TooLarge("sample_batch: batch would exceed 1.5e8 states; stream the "
                   "trajectories instead");
  }
  TrajectoryBatch batch;
  batch.states.resize(static_cast<std::size_t>(trajectories) * length);
  batch.trajectories = trajectories;
  batch.length = n + 1;
  batch.kernel_id = kernel.fingerprint();
  batch.mu0 = flow.measures[0];
  batch.mode = SamplingMode::exact_flow;
  parallel_for(trajectories, threads, [&](long long i) {
    std::mt19937_64 eng = rng.stream(static_cast<std::uint64_t>(i));
    sampler.sample_into(eng, {batch.states.data() + static_cast<std::size_t>(i) * length, length});
  });
  return batch;
}

ParticleSystemResult particle_system(const NonlinearKernel& kernel,
                                     const MeasureVector& mu0,
                                     int particle_count,
                                     int n,
                                     std::mt19937_64& stream) {
  if (particle_count < 1) throw Error("particle_system: need at least 1 particle");
  if (n < 0) throw Error("particle_system: n must be >= 0");
  const int d = kernel.space().size();
  if (mu0.size() != d) {
    throw DimensionMismatch("particle_system: mu0 size " +
                            std::to_string(mu0.size()) + " vs state space " +
                            std::to_string(d));
  }
  const std::size_t length = static_cast<std::size_t>(n) + 1;
  if (static_cast<double>(particle_count) * static_cast<double>(length) > 1.5e8) {
    throw TooLarge("particle_system: ensemble would exceed 1.5e8 states");
  }

  ParticleSystemResult result;
  result.batch.states.resize(static_cast<std::size_t>(particle_count) * length);
  result.batch.trajectories = particle_count;
  result.batch.length = n + 1;
  result.batch.kernel_id = kernel.fingerprint();
  result.batch.mu0 = mu0;
  result.batch.mode = SamplingMode::particle;
  result.batch.particle_count = particle_count;

  auto state_at = [&](int i, int k) -> std::int32_t& {
    return result.batch.states[static_cast<std::size_t>(i) * length +
                               static_cast<std::size_t>(k)];
  };
  auto empirical = [&](int k) {
    std::vector<double> counts(static_cast<std::size_t>(d), 0.0);
    for (int i = 0; i < particle_count; ++i) {
      counts[static_cast<std::size_t>(state_at(i, k))] += 1.0;
    }
    for (double& c : counts) c /= static_cast<double>(particle_count);
    return MeasureVector(std::move(counts));
  };

  for (int i = 0; i < particle_count; ++i) {
    state_at(i, 0) = static_cast<std::int32_t>(
        sample_index(mu0.weights(), canonical_double(stream)));
  }
  result.empirical_path.push_back(empirical(0));
  for (int k = 0; k < n; ++k) {
    // the defining difference from exact_flow mode: the kernel sees the
    // ensemble's empirical measure, not the deterministic law
    const StochasticMatrix P = evaluate(kernel, result.empirical_path.back());
    for (int i = 0; i < particle_count; ++i) {
      state_at(i, k + 1) = static_cast<std::int32_t>(
          sample_index(P.row(state_at(i, k)), canonical_double(stream)));
    }
    result.empirical_path.push_back(empirical(k + 1));
  }
  return result;
}

double clt_statistic(std::span<const std::int32_t> states,
                     const ObservableF& f,
                     double center) {
  if (states.empty()) throw EmptyTrajectory("clt_statistic: no states");
  CompensatedSum acc;
  for (std::int32_t s : states) {
    acc.add(f.values[static_cast<std::size_t>(s)] - center);
  }
  return acc.value() / std::sqrt(static_cast<double>(states.size()));
}

StationaryContext make_stationary_context(const MeasureVector& pi,
                                          const VarianceReport& variance,
                                          const ObservableF& f) {
  StationaryContext ctx;
  ctx.pi = pi;
  ctx.center = stationary_mean(pi, f);
  ctx.sigma2 = variance.degenerate ? 0.0 : variance.sigma2;
  ctx.tail_geometric = variance.tail_geometric;
  for (double v : f.values) {
    ctx.fbar_sup_norm = std::max(ctx.fbar_sup_norm, std::abs(v - ctx.center));
  }
  return ctx;
}

namespace {

// Common sampling loop for clt/lln: reduce each trajectory of n states
// (X_0..X_{n-1}) to the sum of f - center, one stream per trajectory.
std::vector<double> sampled_sums(const NonlinearKernel& kernel,
                                 const MeasureVector& mu0,
                                 const ObservableF& f,
                                 double center,
                                 long long n,
                                 int trajectories,
                                 const RngPolicy& rng,
                                 int threads) {
  if (n < 1) throw Error("sampling: n must be >= 1");
  if (n > 2'000'000'000LL) throw TooLarge("sampling: n exceeds 2e9 steps");
  if (trajectories < 1) throw Error("sampling: trajectories must be >= 1");
  if (f.size() != kernel.space().size()) {
    throw DimensionMismatch("sampling: observable size " +
                            std::to_string(f.size()) + " vs state space " +
                            std::to_string(kernel.space().size()));
  }
  const int steps = static_cast<int>(n) - 1;
  const LawFlow flow = iterate_law(kernel, mu0, steps);
  const TrajectorySampler sampler(kernel, flow, steps);

  std::vector<double> sums(static_cast<std::size_t>(trajectories));
  const int t = resolve_threads(threads, trajectories);
  const long long chunk = (trajectories + t - 1) / t;
  std::vector<std::thread> pool;
  auto worker = [&](long long begin, long long end) {
    std::vector<std::int32_t> scratch(static_cast<std::size_t>(n));
    for (long long i = begin; i < end; ++i) {
      std::mt19937_64 eng = rng.stream(static_cast<std::uint64_t>(i));
      sampler.sample_into(eng, scratch);
      CompensatedSum acc;
      for (std::int32_t s : scratch) {
        acc.add(f.values[static_cast<std::size_t>(s)] - center);
      }
      sums[static_cast<std::size_t>(i)] = acc.value();
    }
  };
  if (t <= 1) {
    worker(0, trajectories);
  } else {
    for (int w = 0; w < t; ++w) {
      const long long begin = static_cast<long long>(w) * chunk;
      const long long end = std::min<long long>(trajectories, begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
  }
  return sums;
}

}  // namespace

CltReport clt_verify(const NonlinearKernel& kernel,
                     const MeasureVector& mu0,
                     const ObservableF& f,
                     const StationaryContext& ctx,
                     long long n,
                     int trajectories,
                     const std::vector<TestFunction>& g_set,
                     const CltThresholds& thresholds,
                     const RngPolicy& rng,
                     int threads) {
  CltReport report;
  report.n = n;
  report.trajectories = trajectories;
  report.sigma2_theoretical = ctx.sigma2;
  report.degenerate = ctx.sigma2 == 0.0;

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  report.samples =
      sampled_sums(kernel, mu0, f, ctx.center, n, trajectories, rng, threads);
  for (double& s : report.samples) s *= inv_sqrt_n;

  if (report.degenerate) {
    for (std::size_t i = 0; i < report.samples.size(); ++i) {
      if (std::abs(report.samples[i]) > thresholds.degenerate_atol) {
        throw DegenerateRequiresExactZero(
            "clt_verify: sigma^2 = 0 but sample " + std::to_string(i) + " = " +
            std::to_string(report.samples[i]));
      }
    }
  }

  const double sigma = std::sqrt(ctx.sigma2);
  report.ks_distance = ks_distance_gaussian(report.samples, sigma);
  for (const TestFunction& tf : g_set) {
    GGap gap;
    gap.name = tf.name;
    CompensatedSum acc;
    for (double s : report.samples) acc.add(tf.g(s));
    gap.empirical = acc.value() / static_cast<double>(report.samples.size());
    gap.expected = gaussian_expectation_gh64(tf, sigma);
    gap.gap = std::abs(gap.empirical - gap.expected);
    report.g_gaps.push_back(std::move(gap));
  }

  report.passed = report.ks_distance <= thresholds.ks;
  for (const GGap& g : report.g_gaps) {
    if (g.gap > thresholds.g_gap) report.passed = false;
  }
  return report;
}

LlnReport lln_verify(const NonlinearKernel& kernel,
                     const MeasureVector& mu0,
                     const ObservableF& f,
                     const StationaryContext& ctx,
                     long long n,
                     int trajectories,
                     const RngPolicy& rng,
                     int threads,
                     double sigma_multiple) {
  LlnReport report;
  report.n = n;
  report.trajectories = trajectories;

  const std::vector<double> sums =
      sampled_sums(kernel, mu0, f, ctx.center, n, trajectories, rng, threads);
  CompensatedSum mean_acc;
  for (double s : sums) {
    const double avg = std::abs(s / static_cast<double>(n));
    mean_acc.add(avg);
    report.max_abs = std::max(report.max_abs, avg);
  }
  report.mean_abs = mean_acc.value() / static_cast<double>(sums.size());

  const double root_n = std::sqrt(static_cast<double>(n));
  if (ctx.sigma2 == 0.0) {
    report.threshold = 1e-8;
  } else if (ctx.tail_geometric) {
    report.threshold = sigma_multiple * std::sqrt(ctx.sigma2) / root_n;
  } else {
    // no trustworthy sigma^2: fall back to the observable's own scale, so a
    // non-mixing chain fails instead of borrowing a CLT-sized allowance
    report.threshold = sigma_multiple * ctx.fbar_sup_norm / root_n;
  }
  report.passed = report.mean_abs <= report.threshold;
  return report;
}

std::vector<std::pair<double, double>> exact_Sn_distribution(
    const NonlinearKernel& kernel,
    const MeasureVector& mu0,
    const ObservableF& f,
    double center,
    int n) {
  if (n < 1) throw Error("exact_Sn_distribution: n must be >= 1");
  const int d = kernel.space().size();
  if (f.size() != d || mu0.size() != d) {
    throw DimensionMismatch("exact_Sn_distribution: dimension mismatch");
  }
  double paths = 1.0;
  for (int i = 0; i < n; ++i) {
    paths *= static_cast<double>(d);
    if (paths > 1e7) {
      throw TooLarge("exact_Sn_distribution: |E|^n exceeds 1e7");
    }
  }

  const LawFlow flow = iterate_law(kernel, mu0, n - 1);
  // Paths contribute through their state-visit counts only, so the DP state
  // is (current state, visit-count vector), not the full path.
  using CountMap = std::map<std::vector<int>, double>;
  std::vector<CountMap> dp(static_cast<std::size_t>(d));
  for (int x = 0; x < d; ++x) {
    if (mu0[x] == 0.0) continue;
    std::vector<int> counts(static_cast<std::size_t>(d), 0);
    counts[static_cast<std::size_t>(x)] = 1;
    dp[static_cast<std::size_t>(x)][std::move(counts)] = mu0[x];
  }
  for (int t = 1; t < n; ++t) {
    const StochasticMatrix P =
        evaluate(kernel, flow.measures[static_cast<std::size_t>(t - 1)]);
    std::vector<CountMap> next(static_cast<std::size_t>(d));
    for (int x = 0; x < d; ++x) {
      for (const auto& [counts, p] : dp[static_cast<std::size_t>(x)]) {
        for (int y = 0; y < d; ++y) {
          const double step = P(x, y);
          if (step == 0.0) continue;
          std::vector<int> moved = counts;
          ++moved[static_cast<std::size_t>(y)];
          next[static_cast<std::size_t>(y)][std::move(moved)] += p * step;
        }
      }
    }
    dp.swap(next);
  }

  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  std::map<double, double> atoms;
  for (int x = 0; x < d; ++x) {
    for (const auto& [counts, p] : dp[static_cast<std::size_t>(x)]) {
      // canonical summation order makes equal count-vectors collapse to
      // bit-identical values
      double s = 0.0;
      for (int y = 0; y < d; ++y) {
        s += static_cast<double>(counts[static_cast<std::size_t>(y)]) *
             (f.values[static_cast<std::size_t>(y)] - center);
      }
      atoms[s * inv_sqrt_n] += p;
    }
  }
  return {atoms.begin(), atoms.end()};
}

double ks_distance_gaussian(std::span<const double> samples, double sigma) {
  if (samples.empty()) throw EmptyTrajectory("ks_distance_gaussian: no samples");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double m = static_cast<double>(sorted.size());
  if (sigma == 0.0) {
    // reference is the unit step at 0
    std::size_t neg = 0, pos = 0;
    for (double s : sorted) {
      if (s < 0.0) ++neg;
      if (s > 0.0) ++pos;
    }
    return static_cast<double>(std::max(neg, pos)) / m;
  }
  double dist = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double cdf = normal_cdf(sorted[i], sigma);
    dist = std::max(dist, cdf - static_cast<double>(i) / m);
    dist = std::max(dist, static_cast<double>(i + 1) / m - cdf);
  }
  return dist;
}

double ks_distance_discrete(std::span<const double> samples,
                            std::span<const std::pair<double, double>> atoms) {
  if (samples.empty() || atoms.empty()) {
    throw EmptyTrajectory("ks_distance_discrete: empty input");
  }
  std::vector<std::pair<double, double>> sorted_atoms(atoms.begin(), atoms.end());
  std::sort(sorted_atoms.begin(), sorted_atoms.end());
  std::vector<double> atom_values;
  atom_values.reserve(sorted_atoms.size());
  for (const auto& [v, p] : sorted_atoms) atom_values.push_back(v);

  // Snap samples onto atom values within an absolute 1e-9: summation-order
  // rounding in the sample statistic must not slide mass across an atom.
  std::vector<double> snapped(samples.begin(), samples.end());
  for (double& s : snapped) {
    const auto it =
        std::lower_bound(atom_values.begin(), atom_values.end(), s);
    double best = s;
    double best_gap = 1e-9;
    if (it != atom_values.end() && std::abs(*it - s) <= best_gap) {
      best = *it;
      best_gap = std::abs(*it - s);
    }
    if (it != atom_values.begin() && std::abs(*(it - 1) - s) <= best_gap) {
      best = *(it - 1);
    }
    s = best;
  }
  std::sort(snapped.begin(), snapped.end());

  const double m = static_cast<double>(snapped.size());
  double atom_total = 0.0;
  for (const auto& [v, p] : sorted_atoms) atom_total += p;

  double dist = 0.0;
  std::size_t si = 0;
  std::size_t ai = 0;
  double emp = 0.0;
  double disc = 0.0;
  while (si < snapped.size() || ai < sorted_atoms.size()) {
    double v;
    if (ai == sorted_atoms.size()) {
      v = snapped[si];
    } else if (si == snapped.size()) {
      v = sorted_atoms[ai].first;
    } else {
      v = std::min(snapped[si], sorted_atoms[ai].first);
    }
    // left limit at v
    dist = std::max(dist, std::abs(emp / m - disc / atom_total));
    while (si < snapped.size() && snapped[si] == v) {
      emp += 1.0;
      ++si;
    }
    while (ai < sorted_atoms.size() && sorted_atoms[ai].first == v) {
      disc += sorted_atoms[ai].second;
      ++ai;
    }
    // value at v
    dist = std::max(dist, std::abs(emp / m - disc / atom_total));
  }
  return dist;
}

}  // namespace nmc
