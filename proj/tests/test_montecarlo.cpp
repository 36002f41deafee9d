#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "nmc/errors.hpp"
#include "nmc/montecarlo.hpp"
#include "oracles.hpp"

using namespace nmc;

namespace {

const std::vector<std::vector<double>> kA{{0.9, 0.1}, {0.2, 0.8}};

NonlinearKernel constant_kernel(const std::vector<std::vector<double>>& rows) {
  return NonlinearKernel(StateSpace(static_cast<int>(rows.size())),
                         ConstantFamily{StochasticMatrix(rows)});
}

}  // namespace

TEST_CASE("clt statistic on a written-out trajectory") {
  const ObservableF f({0.0, 1.0});
  const std::vector<std::int32_t> states{0, 1, 1};
  // (0 - 1/3) + (1 - 1/3) + (1 - 1/3) = 1, over sqrt(3)
  CHECK(clt_statistic(states, f, 1.0 / 3.0) ==
        doctest::Approx(1.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK(clt_statistic(states, f, 0.0) == doctest::Approx(2.0 / std::sqrt(3.0)).epsilon(1e-14));
  CHECK_THROWS_AS(clt_statistic(std::vector<std::int32_t>{}, f, 0.0), EmptyTrajectory);
}

TEST_CASE("trajectory sampler validates its flow") {
  const NonlinearKernel k = constant_kernel(kA);
  const LawFlow flow = iterate_law(k, barycenter(2), 5);
  CHECK_THROWS_AS(TrajectorySampler(k, flow, 9), FlowTooShort);

  const NonlinearKernel other = constant_kernel({{0.5, 0.5}, {0.5, 0.5}});
  CHECK_THROWS_AS(TrajectorySampler(other, flow, 3), KernelMismatch);
}

TEST_CASE("batches are bit-identical across thread counts") {
  const NonlinearKernel k = constant_kernel(kA);
  const LawFlow flow = iterate_law(k, barycenter(2), 16);
  const RngPolicy rng{991};
  const TrajectoryBatch one = sample_batch(k, flow, 16, 64, rng, 1);
  const TrajectoryBatch two = sample_batch(k, flow, 16, 64, rng, 2);
  const TrajectoryBatch five = sample_batch(k, flow, 16, 64, rng, 5);
  CHECK(one.states == two.states);
  CHECK(one.states == five.states);

  const TrajectoryBatch reseeded = sample_batch(k, flow, 16, 64, RngPolicy{992}, 1);
  CHECK(one.states != reseeded.states);
}

TEST_CASE("per-step marginals track the exact law") {
  const NonlinearKernel k = constant_kernel(kA);
  const int n = 6;
  const int M = 40000;
  const LawFlow flow = iterate_law(k, vertex(2, 0), n);
  const TrajectoryBatch batch = sample_batch(k, flow, n, M, RngPolicy{4242}, 0);
  for (int step : {0, 1, 3, 6}) {
    int ones = 0;
    for (int i = 0; i < M; ++i) ones += batch.trajectory(i)[step];
    const double freq = static_cast<double>(ones) / M;
    const double p = flow.measures[step][1];
    const double band = 4.0 * std::sqrt(std::max(p * (1.0 - p), 1e-12) / M);
    CHECK(std::abs(freq - p) <= band);
  }
}

TEST_CASE("exact statistic distribution at horizon one") {
  const NonlinearKernel k = constant_kernel(kA);
  const MeasureVector mu0({0.3, 0.7});
  const ObservableF f({0.0, 1.0});
  const auto atoms = exact_Sn_distribution(k, mu0, f, 0.0, 1);
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0].first == doctest::Approx(0.0));
  CHECK(atoms[0].second == doctest::Approx(0.3).epsilon(1e-14));
  CHECK(atoms[1].first == doctest::Approx(1.0));
  CHECK(atoms[1].second == doctest::Approx(0.7).epsilon(1e-14));
}

TEST_CASE("exact statistic distribution at horizon two, by hand") {
  const NonlinearKernel k = constant_kernel(kA);
  const ObservableF f({0.0, 1.0});
  // X_0 = 0 surely; S_2 counts visits to state 1 among X_0, X_1
  const auto atoms = exact_Sn_distribution(k, vertex(2, 0), f, 0.0, 2);
  REQUIRE(atoms.size() == 2);
  CHECK(atoms[0].first == doctest::Approx(0.0));
  CHECK(atoms[0].second == doctest::Approx(0.9).epsilon(1e-14));
  CHECK(atoms[1].first == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-14));
  CHECK(atoms[1].second == doctest::Approx(0.1).epsilon(1e-14));
}

TEST_CASE("exact distribution masses always total one") {
  oracle::TestRng rng(71030);
  for (int reps = 0; reps < 20; ++reps) {
    const auto rows = oracle::random_stochastic(rng, 2, 0.05);
    const NonlinearKernel k = constant_kernel(rows);
    const auto mu0_raw = oracle::random_point(rng, 2);
    const auto f_raw = oracle::random_observable(rng, 2, 0.2);
    const auto atoms = exact_Sn_distribution(k, MeasureVector{std::vector<double>(mu0_raw)},
                                             ObservableF{std::vector<double>(f_raw)}, 0.1, 9);
    double total = 0.0;
    for (const auto& [value, mass] : atoms) total += mass;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("exact distribution refuses exploding state counts") {
  const NonlinearKernel k = constant_kernel(kA);
  CHECK_THROWS_AS(exact_Sn_distribution(k, barycenter(2), ObservableF({0.0, 1.0}), 0.0, 24),
                  TooLarge);
}

TEST_CASE("gaussian KS distance on a three-point sample") {
  const std::vector<double> samples{-1.0, 0.0, 1.0};
  const double expected = std::max(1.0 / 3.0 - standard_normal_cdf(-1.0),
                                   standard_normal_cdf(1.0) - 2.0 / 3.0);
  CHECK(ks_distance_gaussian(samples, 1.0) == doctest::Approx(expected).epsilon(1e-12));

  // degenerate reference: unit step at zero
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  CHECK(ks_distance_gaussian(zeros, 0.0) == doctest::Approx(0.0));
  const std::vector<double> off{0.0, 0.5};
  CHECK(ks_distance_gaussian(off, 0.0) == doctest::Approx(0.5));
}

TEST_CASE("discrete KS distance with snapping") {
  const std::vector<std::pair<double, double>> atoms{{0.0, 0.5}, {1.0, 0.5}};
  CHECK(ks_distance_discrete(std::vector<double>{0.0, 0.0, 1.0, 1.0}, atoms) ==
        doctest::Approx(0.0));
  CHECK(ks_distance_discrete(std::vector<double>{0.0, 0.0, 0.0, 1.0}, atoms) ==
        doctest::Approx(0.25));
  // value within 1e-9 of an atom counts as that atom
  CHECK(ks_distance_discrete(std::vector<double>{5e-10, 5e-10, 1.0, 1.0}, atoms) ==
        doctest::Approx(0.0));
  // a value on no atom contributes its full empirical jump
  CHECK(ks_distance_discrete(std::vector<double>{0.5}, atoms) == doctest::Approx(0.5));
}

TEST_CASE("particle system stays near the exact flow") {
  const NonlinearKernel k = constant_kernel(kA);
  std::mt19937_64 stream(2024);
  const ParticleSystemResult ps = particle_system(k, barycenter(2), 2000, 4, stream);
  REQUIRE(ps.empirical_path.size() == 5);
  const LawFlow flow = iterate_law(k, barycenter(2), 4);
  for (int step = 0; step <= 4; ++step) {
    CHECK(tv_distance(ps.empirical_path[step], flow.measures[step]) <= 0.05);
  }
  CHECK(ps.batch.mode == SamplingMode::particle);
  CHECK(ps.batch.particle_count == 2000);
  CHECK(ps.batch.trajectories == 2000);
}

TEST_CASE("clt verification passes on the classical chain") {
  const NonlinearKernel k = constant_kernel(kA);
  const InvariantResult inv = find_invariant(k);
  const VarianceReport vr =
      asymptotic_variance(evaluate(k, inv.pi), inv.pi, ObservableF({0.0, 1.0}));
  const StationaryContext ctx = make_stationary_context(inv.pi, vr, ObservableF({0.0, 1.0}));
  CHECK(ctx.sigma2 == doctest::Approx(34.0 / 27.0).epsilon(1e-8));
  CHECK(ctx.center == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  // n needs to be long enough that the 1/sqrt(n) lattice spacing of S_n does
  // not contribute a visible KS floor of its own.
  const CltReport rep = clt_verify(k, barycenter(2), ObservableF({0.0, 1.0}), ctx, 2000, 8000,
                                   default_test_functions(), CltThresholds{}, RngPolicy{777}, 0);
  CHECK(rep.passed);
  CHECK(rep.ks_distance <= 0.025);
  CHECK(rep.samples.size() == 8000);
  for (const auto& gap : rep.g_gaps) CHECK(gap.gap <= 0.02);
  CHECK_FALSE(rep.degenerate);
}

TEST_CASE("degenerate observable short-circuits to the point mass") {
  const NonlinearKernel k = constant_kernel(kA);
  const InvariantResult inv = find_invariant(k);
  const ObservableF ones({1.0, 1.0});
  const VarianceReport vr = asymptotic_variance(evaluate(k, inv.pi), inv.pi, ones);
  const StationaryContext ctx = make_stationary_context(inv.pi, vr, ones);
  const CltReport rep = clt_verify(k, barycenter(2), ones, ctx, 50, 200,
                                   default_test_functions(), CltThresholds{}, RngPolicy{778}, 0);
  CHECK(rep.degenerate);
  CHECK(rep.passed);
  CHECK(rep.ks_distance == 0.0);
  for (double s : rep.samples) CHECK(s == 0.0);
}

TEST_CASE("lln verification on the classical chain") {
  const NonlinearKernel k = constant_kernel(kA);
  const InvariantResult inv = find_invariant(k);
  const ObservableF f({0.0, 1.0});
  const VarianceReport vr = asymptotic_variance(evaluate(k, inv.pi), inv.pi, f);
  const StationaryContext ctx = make_stationary_context(inv.pi, vr, f);
  const LlnReport rep = lln_verify(k, barycenter(2), f, ctx, 2000, 400, RngPolicy{779}, 0);
  CHECK(rep.passed);
  CHECK(rep.mean_abs <= rep.threshold);
  CHECK(rep.threshold == doctest::Approx(3.0 * std::sqrt(34.0 / 27.0 / 2000.0)).epsilon(1e-6));
}
