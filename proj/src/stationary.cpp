#include "nmc/stationary.hpp"

#include <algorithm>
#include <cmath>

#include "nmc/errors.hpp"
#include "nmc/numerics.hpp"

namespace nmc {

namespace {

void check_invariant(const StochasticMatrix& P_pi, const MeasureVector& pi) {
  if (pi.size() != P_pi.size()) {
    throw DimensionMismatch("stationary: pi size " + std::to_string(pi.size()) +
                            " vs matrix size " + std::to_string(P_pi.size()));
  }
  const double gap = tv_distance(push_forward(pi, P_pi), pi);
  if (gap > 1e-10) {
    throw NotInvariant("stationary: tv(pi P, pi) = " + std::to_string(gap) +
                       " exceeds 1e-10");
  }
}

std::vector<double> centered_values(const MeasureVector& pi, const ObservableF& f) {
  const double mean = stationary_mean(pi, f);
  std::vector<double> fbar(f.values);
  for (double& v : fbar) v -= mean;
  return fbar;
}

}  // namespace

ObservableF::ObservableF(std::vector<double> values_in, std::string name_in)
    : values(std::move(values_in)), name(std::move(name_in)) {
  if (values.empty()) {
    throw DimensionMismatch("ObservableF: empty value vector");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw Error("ObservableF: entry " + std::to_string(i) + " is not finite");
    }
    sup_norm = std::max(sup_norm, std::abs(values[i]));
  }
}

double stationary_mean(const MeasureVector& pi, const ObservableF& f) {
  if (pi.size() != f.size()) {
    throw DimensionMismatch("stationary_mean: pi size " +
                            std::to_string(pi.size()) + " vs observable size " +
                            std::to_string(f.size()));
  }
  // plain left-to-right sum: for f identically 1.0 this returns exactly 1.0
  // because measure weights sum to exactly 1.0 in this order
  double mean = 0.0;
  for (int x = 0; x < pi.size(); ++x) mean += pi[x] * f.values[x];
  return mean;
}

VarianceReport asymptotic_variance(const StochasticMatrix& P_pi,
                                   const MeasureVector& pi,
                                   const ObservableF& f,
                                   double tail_tolerance,
                                   int k_cap) {
  if (!(tail_tolerance > 0.0)) {
    throw Error("asymptotic_variance: tail_tolerance must be > 0");
  }
  if (k_cap < 6) throw Error("asymptotic_variance: k_cap must be >= 6");
  check_invariant(P_pi, pi);
  if (f.size() != P_pi.size()) {
    throw DimensionMismatch("asymptotic_variance: observable size " +
                            std::to_string(f.size()) + " vs matrix size " +
                            std::to_string(P_pi.size()));
  }

  const int d = P_pi.size();
  const std::vector<double> fbar = centered_values(pi, f);

  VarianceReport report;
  {
    CompensatedSum acc;
    for (int x = 0; x < d; ++x) acc.add(pi[x] * fbar[static_cast<std::size_t>(x)] *
                                        fbar[static_cast<std::size_t>(x)]);
    report.var0 = acc.value();
  }

  // round-off scale for covariances; below it the tail is numerically dead
  const double dead = 1e-16 * (1.0 + std::abs(report.var0));
  constexpr int kWindow = 5;

  std::vector<double> v = fbar;  // v = P^k fbar after k iterations
  std::vector<double> next(static_cast<std::size_t>(d));
  CompensatedSum cov_sum;
  report.tail_geometric = false;
  for (int k = 1; k <= k_cap; ++k) {
    for (int x = 0; x < d; ++x) {
      CompensatedSum acc;
      for (int y = 0; y < d; ++y) acc.add(P_pi(x, y) * v[static_cast<std::size_t>(y)]);
      next[static_cast<std::size_t>(x)] = acc.value();
    }
    v.swap(next);
    CompensatedSum acc;
    for (int x = 0; x < d; ++x) acc.add(pi[x] * fbar[static_cast<std::size_t>(x)] *
                                        v[static_cast<std::size_t>(x)]);
    const double cov_k = acc.value();
    report.covariances.push_back(cov_k);
    cov_sum.add(cov_k);
    report.k_max = k;

    if (k < kWindow) continue;
    bool all_dead = true;
    bool all_alive = true;
    for (int j = k - kWindow; j < k; ++j) {
      const double a = std::abs(report.covariances[static_cast<std::size_t>(j)]);
      if (a > dead) all_dead = false;
      if (a <= 0.0) all_alive = false;
    }
    if (all_dead) {
      const double remaining = 2.0 * dead * static_cast<double>(k_cap - k);
      if (remaining <= tail_tolerance) {
        report.tail_bound = remaining;
        report.tail_geometric = true;
        break;
      }
      continue;
    }
    if (!all_alive) continue;

    // geometric envelope from the last kWindow absolute covariances,
    // worked in logs to dodge overflow for small ratios
    std::vector<double> xs(kWindow), ys(kWindow);
    for (int j = 0; j < kWindow; ++j) {
      const int idx = k - kWindow + j;
      xs[static_cast<std::size_t>(j)] = static_cast<double>(idx + 1);
      ys[static_cast<std::size_t>(j)] =
          std::log(std::abs(report.covariances[static_cast<std::size_t>(idx)]));
    }
    const LineFit line = fit_line(xs, ys);
    const double ln_r = line.slope;
    if (!(ln_r < -1e-9)) continue;  // not contracting
    double ln_c = -1e300;
    for (int j = 0; j < kWindow; ++j) {
      ln_c = std::max(ln_c, ys[static_cast<std::size_t>(j)] -
                                ln_r * xs[static_cast<std::size_t>(j)]);
    }
    const double r = std::exp(ln_r);
    const double ln_tail = std::log(2.0) + ln_c +
                           ln_r * static_cast<double>(k + 1) - std::log1p(-r);
    if (ln_tail <= std::log(tail_tolerance)) {
      report.tail_bound = std::exp(ln_tail);
      report.tail_geometric = true;
      break;
    }
  }
  if (!report.tail_geometric) {
    report.tail_bound =
        std::abs(report.covariances.back()) * static_cast<double>(k_cap);
  }

  double sigma2 = report.var0 + 2.0 * cov_sum.value();
  if (sigma2 < -1e-10) {
    throw Error("asymptotic_variance: series summed to " +
                std::to_string(sigma2) + ", below the -1e-10 clamp floor");
  }
  report.degenerate = sigma2 < 1e-12;
  if (sigma2 < 0.0) sigma2 = 0.0;
  report.sigma2 = sigma2;
  return report;
}

MixingProfile beta_mixing_profile(const StochasticMatrix& P_pi,
                                  const MeasureVector& pi,
                                  int n_max,
                                  double zeta) {
  if (n_max < 1) throw Error("beta_mixing_profile: n_max must be >= 1");
  if (!(zeta > 0.0)) throw Error("beta_mixing_profile: zeta must be > 0");
  check_invariant(P_pi, pi);

  const int d = P_pi.size();
  MixingProfile profile;
  profile.zeta = zeta;
  profile.pi = pi;
  profile.beta.reserve(static_cast<std::size_t>(n_max));

  const double il_exponent = zeta / (2.0 + zeta);
  CompensatedSum il_sum;
  StochasticMatrix Mn = P_pi;
  for (int n = 1; n <= n_max; ++n) {
    if (n > 1) Mn = Mn * P_pi;
    CompensatedSum acc;
    for (int x = 0; x < d; ++x) {
      double row_tv = 0.0;
      for (int y = 0; y < d; ++y) row_tv += std::abs(Mn(x, y) - pi[y]);
      acc.add(pi[x] * 0.5 * row_tv);
    }
    double beta_n = std::clamp(acc.value(), 0.0, 1.0);
    // beta is non-increasing for a stationary chain (one-step contraction);
    // the running matrix power only wiggles at round-off level once P^n has
    // converged, so project onto the known monotone shape
    if (!profile.beta.empty()) beta_n = std::min(beta_n, profile.beta.back());
    profile.beta.push_back(beta_n);
    il_sum.add(std::pow(beta_n, il_exponent));
    profile.il_partial_sums.push_back(il_sum.value());
  }
  profile.alpha_upper = profile.beta;

  // the profile bottoms out at a noise plateau set by the accuracy of pi
  // and of the accumulated matrix powers (~1e-12); regress only well above it
  constexpr double kFloor = 1e-10;
  std::vector<double> xs, ys;
  for (std::size_t i = 0; i < profile.beta.size(); ++i) {
    if (profile.beta[i] > kFloor) {
      xs.push_back(static_cast<double>(i + 1));
      ys.push_back(std::log(profile.beta[i]));
    }
  }
  if (xs.size() < 4) {
    // too few live points to regress; decay below the floor counts as
    // summable, a short profile does not
    profile.summable_diagnostic = profile.beta.back() <= kFloor;
    profile.fit_ratio = 0.0;
    profile.fit_r_squared = 0.0;
  } else {
    const LineFit line = fit_line(xs, ys);
    profile.fit_ratio = std::exp(line.slope);
    profile.fit_r_squared = line.r_squared;
    profile.summable_diagnostic =
        line.r_squared >= 0.99 && profile.fit_ratio <= 1.0 - 1e-9;
  }
  return profile;
}

IlCheckResult ibragimov_linnik_check(const MixingProfile& profile,
                                     const ObservableF& f) {
  IlCheckResult result;
  const std::vector<double> fbar = centered_values(profile.pi, f);
  CompensatedSum acc;
  for (int x = 0; x < profile.pi.size(); ++x) {
    acc.add(profile.pi[x] *
            std::pow(std::abs(fbar[static_cast<std::size_t>(x)]), 2.0 + profile.zeta));
  }
  result.moment_finite = true;
  result.moment_value = acc.value();
  result.summable = profile.summable_diagnostic;
  result.fit_ratio = profile.fit_ratio;
  result.partial_sum_last =
      profile.il_partial_sums.empty() ? 0.0 : profile.il_partial_sums.back();
  result.passed = result.moment_finite && result.summable;
  return result;
}

}  // namespace nmc
