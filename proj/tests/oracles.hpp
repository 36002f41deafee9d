#pragma once

// Independent reference implementations used by the test suite. Everything
// here is deliberately naive (plain loops, no shared code with the library)
// so that agreement between the two is meaningful.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

// ---------------------------------------------------------------------------
// deterministic randomness for test cases

struct TestRng {
  std::mt19937_64 eng;

  explicit TestRng(std::uint64_t seed) : eng(seed) {}

  double u() { return (eng() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * u(); }

  int index(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }

  // standard normal via Box-Muller; draws two uniforms per call
  double gaussian() {
    double u1 = u();
    while (u1 <= 0.0) u1 = u();
    const double u2 = u();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

// random probability vector with every coordinate >= floor_mass
inline std::vector<double> random_point(TestRng& rng, int d, double floor_mass = 0.0) {
  std::vector<double> e(d);
  double total = 0.0;
  for (int i = 0; i < d; ++i) {
    e[i] = -std::log(1.0 - rng.u() + 1e-300);
    total += e[i];
  }
  const double open = 1.0 - d * floor_mass;
  std::vector<double> p(d);
  double acc = 0.0;
  for (int i = 0; i + 1 < d; ++i) {
    p[i] = floor_mass + open * e[i] / total;
    acc += p[i];
  }
  p[d - 1] = 1.0 - acc;
  return p;
}

// random row-stochastic matrix with min entry >= floor_mass
inline Matrix random_stochastic(TestRng& rng, int d, double floor_mass) {
  Matrix rows(d);
  for (int x = 0; x < d; ++x) rows[x] = random_point(rng, d, floor_mass);
  return rows;
}

// random observable values with spread max - min >= min_spread
inline std::vector<double> random_observable(TestRng& rng, int d, double min_spread) {
  std::vector<double> f(d);
  for (;;) {
    double lo = 1e300, hi = -1e300;
    for (int x = 0; x < d; ++x) {
      f[x] = rng.uniform(-2.0, 2.0);
      lo = std::min(lo, f[x]);
      hi = std::max(hi, f[x]);
    }
    if (hi - lo >= min_spread) return f;
  }
}

// ---------------------------------------------------------------------------
// plain linear algebra

inline std::vector<double> mat_vec_left(const std::vector<double>& mu, const Matrix& A) {
  const int d = static_cast<int>(mu.size());
  std::vector<double> out(d, 0.0);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y) out[y] += mu[x] * A[x][y];
  return out;
}

inline Matrix mat_mul(const Matrix& A, const Matrix& B) {
  const int d = static_cast<int>(A.size());
  Matrix C(d, std::vector<double>(d, 0.0));
  for (int x = 0; x < d; ++x)
    for (int k = 0; k < d; ++k)
      for (int y = 0; y < d; ++y) C[x][y] += A[x][k] * B[k][y];
  return C;
}

inline double tv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

// ---------------------------------------------------------------------------
// invariant law of a linear (constant-kernel) chain by long power iteration

inline std::vector<double> invariant_power(const Matrix& A,
                                           int max_iters = 100000,
                                           double tol = 1e-15) {
  const int d = static_cast<int>(A.size());
  std::vector<double> mu(d, 1.0 / d);
  for (int it = 0; it < max_iters; ++it) {
    std::vector<double> nu = mat_vec_left(mu, A);
    double s = 0.0;
    for (double w : nu) s += w;
    for (double& w : nu) w /= s;
    const double dist = tv(mu, nu);
    mu = nu;
    if (dist <= tol) break;
  }
  return mu;
}

// ---------------------------------------------------------------------------
// Var(S_n) for the stationary linear chain by forward moment recursion.
// State-resolved partial moments: p[y] = P(X_t = y),
// m1[y] = E[S 1{X_t=y}], m2[y] = E[S^2 1{X_t=y}] with S = sum_{i<=t} fbar(X_i).

inline double var_Sn_stationary(const Matrix& P,
                                const std::vector<double>& pi,
                                const std::vector<double>& fbar,
                                int n) {
  const int d = static_cast<int>(pi.size());
  std::vector<double> p(pi), m1(d), m2(d);
  for (int x = 0; x < d; ++x) {
    m1[x] = pi[x] * fbar[x];
    m2[x] = pi[x] * fbar[x] * fbar[x];
  }
  for (int t = 1; t < n; ++t) {
    std::vector<double> np(d, 0.0), nm1(d, 0.0), nm2(d, 0.0);
    for (int x = 0; x < d; ++x) {
      for (int y = 0; y < d; ++y) {
        const double a = P[x][y];
        if (a == 0.0) continue;
        np[y] += a * p[x];
        nm1[y] += a * (m1[x] + p[x] * fbar[y]);
        nm2[y] += a * (m2[x] + 2.0 * m1[x] * fbar[y] + p[x] * fbar[y] * fbar[y]);
      }
    }
    p.swap(np);
    m1.swap(nm1);
    m2.swap(nm2);
  }
  double s1 = 0.0, s2 = 0.0;
  for (int y = 0; y < d; ++y) {
    s1 += m1[y];
    s2 += m2[y];
  }
  return s2 - s1 * s1;
}

// sigma^2 estimate: averaged first difference of Var(S_n) at a short horizon.
// Var(S_n) = n sigma^2 + c + o(1) for geometrically mixing chains, so the
// difference converges geometrically; averaging two consecutive differences
// cancels the leading alternating part.
inline double sigma2_by_enumeration(const Matrix& P,
                                    const std::vector<double>& pi,
                                    const std::vector<double>& f,
                                    int horizon = 40) {
  const int d = static_cast<int>(pi.size());
  double mean = 0.0;
  for (int x = 0; x < d; ++x) mean += pi[x] * f[x];
  std::vector<double> fbar(d);
  for (int x = 0; x < d; ++x) fbar[x] = f[x] - mean;
  const double v2 = var_Sn_stationary(P, pi, fbar, horizon);
  const double v1 = var_Sn_stationary(P, pi, fbar, horizon - 1);
  const double v0 = var_Sn_stationary(P, pi, fbar, horizon - 2);
  return ((v2 - v1) + (v1 - v0)) / 2.0;
}

// ---------------------------------------------------------------------------
// beta(n) for the stationary linear chain by direct matrix powers

inline std::vector<double> beta_by_powers(const Matrix& P,
                                          const std::vector<double>& pi,
                                          int n_max) {
  const int d = static_cast<int>(P.size());
  Matrix Pn = P;
  std::vector<double> beta;
  beta.reserve(n_max);
  for (int n = 1; n <= n_max; ++n) {
    double b = 0.0;
    for (int x = 0; x < d; ++x) {
      double row_tv = 0.0;
      for (int y = 0; y < d; ++y) row_tv += std::abs(Pn[x][y] - pi[y]);
      b += pi[x] * 0.5 * row_tv;
    }
    beta.push_back(b);
    if (n < n_max) Pn = mat_mul(Pn, P);
  }
  return beta;
}

// ---------------------------------------------------------------------------
// E[g(eta)] for eta ~ N(0, sigma^2) by composite Simpson on [-10 sigma, 10 sigma].
// Fine enough (2e4 panels) for piecewise-smooth g with corners.

template <class G>
double gaussian_expectation_simpson(double sigma, G&& g) {
  if (sigma <= 0.0) return g(0.0);
  const int panels = 20000;
  const double lo = -10.0 * sigma;
  const double hi = 10.0 * sigma;
  const double h = (hi - lo) / panels;
  const double inv = 1.0 / (sigma * std::sqrt(6.283185307179586));
  auto integrand = [&](double x) {
    return g(x) * inv * std::exp(-0.5 * x * x / (sigma * sigma));
  };
  double s = integrand(lo) + integrand(hi);
  for (int i = 1; i < panels; ++i) s += integrand(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// ---------------------------------------------------------------------------
// exact Kolmogorov-Smirnov distance of a sorted sample against a cdf value
// callback (classical two-sided formula)

template <class Cdf>
double ks_against_cdf(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double m = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double F = cdf(samples[i]);
    ks = std::max(ks, std::abs(F - static_cast<double>(i + 1) / m));
    ks = std::max(ks, std::abs(F - static_cast<double>(i) / m));
  }
  return ks;
}

}  // namespace oracle
