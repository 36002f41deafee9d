#include "nmc/flow.hpp"

#include <algorithm>
#include <cmath>

#include "nmc/numerics.hpp"

namespace nmc {

LawFlow iterate_law(const NonlinearKernel& kernel, const MeasureVector& mu0, int n) {
  if (n < 0) throw Error("iterate_law: n must be >= 0");
  if (mu0.size() != kernel.space().size()) {
    throw DimensionMismatch("iterate_law: mu0 size " + std::to_string(mu0.size()) +
                            " vs state space " +
                            std::to_string(kernel.space().size()));
  }
  LawFlow flow;
  flow.kernel_id = kernel.fingerprint();
  flow.measures.reserve(static_cast<std::size_t>(n) + 1);
  flow.measures.push_back(mu0);
  for (int k = 0; k < n; ++k) {
    const MeasureVector& mu = flow.measures.back();
    flow.measures.push_back(push_forward(mu, evaluate(kernel, mu)));
  }
  return flow;
}

void fill_tv_to_invariant(LawFlow& flow, const MeasureVector& pi) {
  flow.tv_to_invariant.clear();
  flow.tv_to_invariant.reserve(flow.measures.size());
  for (const MeasureVector& mu : flow.measures) {
    flow.tv_to_invariant.push_back(tv_distance(mu, pi));
  }
}

InvariantResult find_invariant(const NonlinearKernel& kernel,
                               double tolerance,
                               long long max_iters,
                               std::vector<MeasureVector> starts,
                               double damping) {
  if (!(tolerance > 0.0)) throw Error("find_invariant: tolerance must be > 0");
  if (max_iters < 1) throw Error("find_invariant: max_iters must be >= 1");
  if (!(damping > 0.0 && damping <= 1.0)) {
    throw Error("find_invariant: damping must lie in (0,1]");
  }
  const int d = kernel.space().size();
  if (starts.empty()) {
    // vertices first, barycenter last: pi is the limit of the last start
    for (int x = 0; x < d; ++x) starts.push_back(vertex(d, x));
    starts.push_back(barycenter(d));
  }

  InvariantResult result;
  result.converged = true;
  for (const MeasureVector& start : starts) {
    if (start.size() != d) {
      throw DimensionMismatch("find_invariant: start size " +
                              std::to_string(start.size()) + " vs state space " +
                              std::to_string(d));
    }
    MeasureVector mu = start;
    double residual = 1.0;
    bool this_converged = false;
    long long it = 0;
    for (; it < max_iters; ++it) {
      const MeasureVector next = push_forward(mu, evaluate(kernel, mu));
      residual = tv_distance(mu, next);
      if (residual <= tolerance) {
        this_converged = true;
        break;
      }
      if (damping == 1.0) {
        mu = next;
      } else {
        std::vector<double> mixed(static_cast<std::size_t>(d));
        for (int x = 0; x < d; ++x) {
          mixed[static_cast<std::size_t>(x)] =
              (1.0 - damping) * mu[x] + damping * next[x];
        }
        mu = MeasureVector(std::move(mixed));
      }
    }
    if (this_converged) {
      // Polish to the bit-exact fixed point of the computed map: the
      // tolerance stop leaves mu one tolerance behind, which would cap the
      // accuracy of every tv-to-invariant curve measured against it. The
      // exact-unit-sum representation makes the iteration land on a fixed
      // double vector, so bit-equality is the natural stop; residuals that
      // stop shrinking (ulp dithering) end the polish with the best point.
      MeasureVector img = push_forward(mu, evaluate(kernel, mu));
      for (int polish = 0; polish < 1000 && !(img == mu); ++polish) {
        MeasureVector img2 = push_forward(img, evaluate(kernel, img));
        const double r2 = tv_distance(img, img2);
        if (r2 > residual) break;
        mu = std::move(img);
        img = std::move(img2);
        residual = r2;
      }
    }
    result.starts.emplace_back(start, mu);
    result.pi = mu;
    result.residual = residual;
    result.iterations = it;
    if (!this_converged) result.converged = false;
  }

  // pairwise comparison of limits; multiple fixed points are a finding,
  // not an error
  result.unique_within_tolerance = true;
  for (std::size_t i = 0; i < result.starts.size(); ++i) {
    for (std::size_t j = i + 1; j < result.starts.size(); ++j) {
      if (tv_distance(result.starts[i].second, result.starts[j].second) > 1e-8) {
        result.unique_within_tolerance = false;
      }
    }
  }

  if (!result.converged) {
    throw NotConverged("find_invariant: some start exceeded " +
                           std::to_string(max_iters) + " iterations",
                       std::move(result));
  }
  return result;
}

RateFit fit_rate(const LawFlow& flow, const MeasureVector& pi) {
  constexpr double kTvFloor = 1e-13;
  std::vector<double> ks;
  std::vector<double> logs;
  for (std::size_t k = 0; k < flow.measures.size(); ++k) {
    const double tv = tv_distance(flow.measures[k], pi);
    if (tv > kTvFloor) {
      ks.push_back(static_cast<double>(k));
      logs.push_back(std::log(tv));
    }
  }
  if (ks.size() < 4) {
    throw InsufficientDecay("fit_rate: only " + std::to_string(ks.size()) +
                            " steps above the TV floor, need 4");
  }
  // Trim the leading transient: a start aligned with a fast-decaying
  // direction leaves early points far above the asymptotic line while r^2
  // stays high on the long tail. Pop head points until every point in the
  // window sits within the ln 2 envelope slack of the fitted line.
  constexpr double kResidCap = 0.62;  // just under ln 2
  std::size_t begin = 0;
  LineFit line = fit_line(ks, logs);
  while (ks.size() - begin > 4) {
    double max_resid = 0.0;
    for (std::size_t i = begin; i < ks.size(); ++i) {
      max_resid = std::max(max_resid, logs[i] - (line.intercept + line.slope * ks[i]));
    }
    if (max_resid <= kResidCap) break;
    ++begin;
    line = fit_line(std::vector<double>(ks.begin() + static_cast<std::ptrdiff_t>(begin), ks.end()),
                    std::vector<double>(logs.begin() + static_cast<std::ptrdiff_t>(begin), logs.end()));
  }
  RateFit fit;
  fit.C = -line.slope;
  fit.lnK = line.intercept;
  fit.r_squared = line.r_squared;
  fit.window_begin = static_cast<int>(ks[begin]);
  fit.window_end = static_cast<int>(ks.back());
  return fit;
}

KernelRatioReport kernel_ratio_bounds(const NonlinearKernel& kernel,
                                      const LawFlow& flow,
                                      const MeasureVector& pi,
                                      double C,
                                      double lnK) {
  const StochasticMatrix P_pi = evaluate(kernel, pi);
  const int d = P_pi.size();
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      if (P_pi(x, y) <= 0.0) {
        throw ZeroInvariantEntry("kernel_ratio_bounds: P^pi(" +
                                 std::to_string(x) + "," + std::to_string(y) +
                                 ") = 0, ratio undefined");
      }
    }
  }
  KernelRatioReport report;
  report.C = C;
  report.lnK = lnK;
  report.steps.reserve(flow.measures.size());
  for (std::size_t n = 0; n < flow.measures.size(); ++n) {
    const StochasticMatrix P = evaluate(kernel, flow.measures[n]);
    double ratio = 0.0;
    for (int x = 0; x < d; ++x) {
      for (int y = 0; y < d; ++y) {
        ratio = std::max(ratio, std::abs(P(x, y) / P_pi(x, y) - 1.0));
      }
    }
    KernelRatioStep step;
    step.ratio = ratio;
    step.bound = std::exp(lnK - C * static_cast<double>(n));
    step.holds = ratio <= step.bound;
    if (!step.holds && !report.first_violation) {
      report.first_violation = static_cast<int>(n);
    }
    report.steps.push_back(step);
  }
  return report;
}

StochasticMatrix k_step_kernel(const NonlinearKernel& kernel,
                               const MeasureVector& mu0,
                               int k) {
  if (k < 1) throw Error("k_step_kernel: k must be >= 1");
  MeasureVector mu = mu0;
  StochasticMatrix Q = evaluate(kernel, mu);
  for (int j = 1; j < k; ++j) {
    mu = push_forward(mu, evaluate(kernel, mu));
    Q = Q * evaluate(kernel, mu);
  }
  return Q;
}

}  // namespace nmc
