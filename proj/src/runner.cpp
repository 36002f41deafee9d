#include "nmc/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "nmc/flow.hpp"
#include "nmc/montecarlo.hpp"

namespace nmc {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

// verdict thresholds, fixed here rather than configurable: changing them
// changes what "verified" means
constexpr double kMinorizationFloor = 1e-9;
constexpr double kRateR2Min = 0.99;
constexpr double kStationaryRatioTol = 1e-9;
constexpr double kOracleKsGap = 0.01;

// adaptive flow construction for the rate fit
constexpr double kFlowStopTv = 1e-14;
constexpr std::size_t kFlowMinMeasures = 8;
constexpr int kFlowCapSteps = 2000;
constexpr double kTvFitFloor = 1e-13;  // fit_rate ignores steps below this

constexpr std::uint64_t kMinorizationSalt = 0x6d696e6f72697a65ULL;
constexpr std::uint64_t kCltSalt = 0x636c745f64726177ULL;
constexpr std::uint64_t kLlnSalt = 0x6c6c6e5f64726177ULL;
constexpr std::uint64_t kOracleSalt = 0x6f7261636c655f64ULL;

RngPolicy salted_policy(std::uint64_t master, std::uint64_t salt) {
  std::uint64_t s = master ^ salt;
  return RngPolicy{splitmix64(s)};
}

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_lines(const fs::path& path, const std::string& header,
                 const std::vector<std::string>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << header << '\n';
  for (const auto& row : rows) out << row << '\n';
  if (!out) throw Error("write failed for " + path.string());
}

const char* pf(bool ok) { return ok ? "PASS" : "FAIL"; }

int auto_oracle_horizon(int d) {
  int n = 0;
  double paths = 1.0;
  while (n < 12 && paths * d <= 1e7) {
    paths *= static_cast<double>(d);
    ++n;
  }
  return std::max(n, 1);
}

}  // namespace

RunResult run_subcommand(const std::string& subcommand,
                         const ChainSpec& spec,
                         const std::string& out_dir) {
  static const std::set<std::string> known = {
      "hypotheses", "variance", "mixing", "clt", "lln", "oracle", "all"};
  if (!known.contains(subcommand)) {
    throw Error("unknown subcommand '" + subcommand +
                "' (hypotheses | variance | mixing | clt | lln | oracle | all)");
  }

  const fs::path out(out_dir);
  fs::create_directories(out);

  const Clock::time_point t_total = Clock::now();
  const NonlinearKernel kernel = spec.to_kernel();
  const MeasureVector mu0 = spec.to_mu0();
  const ObservableF f = spec.to_observable();
  const RunParameters& run = spec.run;

  const bool want_hyp = subcommand == "hypotheses" || subcommand == "all";
  const bool want_variance = subcommand == "variance" || subcommand == "all";
  const bool want_mixing = subcommand == "mixing" || subcommand == "all";
  const bool want_clt = subcommand == "clt" || subcommand == "all";
  const bool want_lln = subcommand == "lln" || subcommand == "all";
  const bool want_oracle = subcommand == "oracle" || subcommand == "all";
  const bool need_variance = want_variance || want_clt || want_lln;

  json report;
  report["schema_version"] = 1;
  report["subcommand"] = subcommand;
  report["spec"] = json::parse(serialize_spec(spec));

  json hyp = json::object();
  json conc = json::object();
  json timings = json::object();
  std::vector<std::string> lines;

  bool hyp_failed = false;
  bool conc_failed = false;
  bool conc_skipped = false;

  // Invariant measure: prerequisite of every other check, so it is computed
  // and judged for every subcommand.
  Clock::time_point t0 = Clock::now();
  InvariantResult inv;
  try {
    inv = find_invariant(kernel, run.invariant_tolerance, run.max_iterations);
  } catch (NotConverged& e) {
    inv = std::move(e.partial);
  }
  const bool invariant_ok =
      inv.converged && inv.unique_within_tolerance &&
      inv.residual <= run.invariant_tolerance;

  double limit_spread = 0.0;
  for (std::size_t i = 0; i < inv.starts.size(); ++i) {
    for (std::size_t j = i + 1; j < inv.starts.size(); ++j) {
      if (inv.starts[i].second.size() == inv.starts[j].second.size() &&
          inv.starts[i].second.size() > 0) {
        limit_spread = std::max(
            limit_spread, tv_distance(inv.starts[i].second, inv.starts[j].second));
      }
    }
  }
  {
    json iv;
    iv["pi"] = inv.pi.weights();
    iv["residual"] = inv.residual;
    iv["iterations"] = inv.iterations;
    iv["starts"] = inv.starts.size();
    iv["limit_spread"] = limit_spread;
    iv["unique_within_tolerance"] = inv.unique_within_tolerance;
    iv["converged"] = inv.converged;
    iv["tolerance"] = run.invariant_tolerance;
    iv["passed"] = invariant_ok;
    hyp["invariant"] = std::move(iv);
  }
  if (!invariant_ok) hyp_failed = true;
  lines.push_back(std::string("invariant     ") + pf(invariant_ok) +
                  "  residual=" + fmt6(inv.residual) +
                  " spread=" + fmt6(limit_spread));
  timings["invariant_ms"] = ms_since(t0);

  if (want_hyp) {
    // Minorization: needs no invariant measure, so it always runs.
    t0 = Clock::now();
    const MinorizationReport minor = minorization_bound(
        kernel, run.grid_resolution, run.extra_samples,
        salted_policy(run.seed, kMinorizationSalt).master_seed);
    const bool minor_ok = minor.lower_bound_estimate > kMinorizationFloor;
    {
      json m;
      m["bound"] = minor.lower_bound_estimate;
      m["exact"] = minor.exact;
      m["grid_resolution"] = minor.grid_resolution;
      m["measures_evaluated"] = minor.samples;
      m["argmin"]["x"] = minor.argmin_x;
      m["argmin"]["y"] = minor.argmin_y;
      m["argmin"]["measure"] = minor.argmin_measure.weights();
      m["floor"] = kMinorizationFloor;
      m["passed"] = minor_ok;
      hyp["minorization"] = std::move(m);
    }
    if (!minor_ok) hyp_failed = true;
    lines.push_back(std::string("minorization  ") + pf(minor_ok) + "  bound=" +
                    fmt6(minor.lower_bound_estimate) +
                    (minor.exact ? " (exact)" : " (grid)"));
    timings["minorization_ms"] = ms_since(t0);

    if (invariant_ok) {
      // Law flow from mu0, long enough to watch tv(mu_k, pi) hit the floor.
      t0 = Clock::now();
      LawFlow flow;
      flow.kernel_id = kernel.fingerprint();
      flow.measures.push_back(mu0);
      {
        MeasureVector mu = mu0;
        while (static_cast<int>(flow.measures.size()) - 1 < kFlowCapSteps) {
          if (tv_distance(mu, inv.pi) <= kFlowStopTv &&
              flow.measures.size() >= kFlowMinMeasures) {
            break;
          }
          mu = push_forward(mu, evaluate(kernel, mu));
          flow.measures.push_back(mu);
        }
      }
      fill_tv_to_invariant(flow, inv.pi);
      {
        std::vector<std::string> rows;
        rows.reserve(flow.tv_to_invariant.size());
        for (std::size_t k = 0; k < flow.tv_to_invariant.size(); ++k) {
          rows.push_back(std::to_string(k) + "," + fmt17(flow.tv_to_invariant[k]));
        }
        write_lines(out / "flow_tv.csv", "k,tv", rows);
      }

      RateFit rf;
      bool have_fit = false;
      bool rate_ok = false;
      std::string rate_mode;
      try {
        rf = fit_rate(flow, inv.pi);
        have_fit = true;
        rate_mode = "fitted";
        rate_ok = rf.C > 0.0 && rf.r_squared >= kRateR2Min;
      } catch (const InsufficientDecay&) {
        // fewer than 4 flow steps above the tv floor: the flow reached the
        // invariant measure essentially immediately
        rate_mode = "already_invariant";
        rate_ok = flow.tv_to_invariant.back() <= kTvFitFloor;
      }
      {
        json r;
        r["mode"] = rate_mode;
        if (have_fit) {
          r["C"] = rf.C;
          r["lnK"] = rf.lnK;
          r["r_squared"] = rf.r_squared;
          r["window"] = {rf.window_begin, rf.window_end};
          r["r2_min"] = kRateR2Min;
        }
        r["flow_steps"] = flow.steps();
        r["final_tv"] = flow.tv_to_invariant.back();
        r["passed"] = rate_ok;
        hyp["rate"] = std::move(r);
      }
      if (!rate_ok) hyp_failed = true;
      if (have_fit) {
        lines.push_back(std::string("rate          ") + pf(rate_ok) +
                        "  C=" + fmt6(rf.C) + " r2=" + fmt6(rf.r_squared));
      } else {
        lines.push_back(std::string("rate          ") + pf(rate_ok) +
                        "  already at invariant (final tv=" +
                        fmt6(flow.tv_to_invariant.back()) + ")");
      }
      timings["rate_ms"] = ms_since(t0);

      // Kernel-ratio envelope along the flow.
      t0 = Clock::now();
      const StochasticMatrix P_pi = evaluate(kernel, inv.pi);
      const double min_entry = P_pi.min_entry();
      bool ratio_ok = false;
      json rb;
      if (min_entry <= 0.0) {
        rb["mode"] = "zero_entry";
        rb["min_entry_P_pi"] = min_entry;
        rb["passed"] = false;
        lines.push_back(std::string("ratio_bounds  FAIL  P^pi has a zero entry"));
      } else if (have_fit) {
        // ratio <= 2 tv / min entry, so the fitted tv envelope transfers
        // with slack ln 2 - ln(min entry); checked over the fit window
        const double lnK2 = rf.lnK + std::numbers::ln2 - std::log(min_entry);
        LawFlow window_flow;
        window_flow.kernel_id = flow.kernel_id;
        window_flow.measures.assign(
            flow.measures.begin(),
            flow.measures.begin() + static_cast<std::ptrdiff_t>(rf.window_end) + 1);
        const KernelRatioReport rr =
            kernel_ratio_bounds(kernel, window_flow, inv.pi, rf.C, lnK2);
        double max_ratio = 0.0;
        bool violated_in_window = false;
        for (std::size_t k = 0; k < rr.steps.size(); ++k) {
          max_ratio = std::max(max_ratio, rr.steps[k].ratio);
          if (static_cast<int>(k) >= rf.window_begin && !rr.steps[k].holds) {
            violated_in_window = true;
          }
        }
        ratio_ok = !violated_in_window;
        {
          std::vector<std::string> rows;
          rows.reserve(rr.steps.size());
          for (std::size_t k = 0; k < rr.steps.size(); ++k) {
            rows.push_back(std::to_string(k) + "," + fmt17(rr.steps[k].ratio) +
                           "," + fmt17(rr.steps[k].bound) + "," +
                           (rr.steps[k].holds ? "1" : "0"));
          }
          write_lines(out / "ratio_bounds.csv", "k,ratio,bound,holds", rows);
        }
        rb["mode"] = "envelope";
        rb["C"] = rr.C;
        rb["lnK"] = rr.lnK;
        rb["min_entry_P_pi"] = min_entry;
        rb["max_ratio"] = max_ratio;
        rb["window"] = {rf.window_begin, rf.window_end};
        if (rr.first_violation) {
          rb["first_violation"] = *rr.first_violation;
        } else {
          rb["first_violation"] = nullptr;
        }
        rb["passed"] = ratio_ok;
        lines.push_back(std::string("ratio_bounds  ") + pf(ratio_ok) +
                        "  max_ratio=" + fmt6(max_ratio));
      } else {
        // flow pinned at pi: P^{mu_k} must coincide with P^pi up to round-off;
        // a constant bound of kStationaryRatioTol encodes exactly that
        const KernelRatioReport rr = kernel_ratio_bounds(
            kernel, flow, inv.pi, 0.0, std::log(kStationaryRatioTol));
        double max_ratio = 0.0;
        for (const auto& step : rr.steps) max_ratio = std::max(max_ratio, step.ratio);
        ratio_ok = !rr.first_violation.has_value();
        rb["mode"] = "already_invariant";
        rb["min_entry_P_pi"] = min_entry;
        rb["max_ratio"] = max_ratio;
        rb["tolerance"] = kStationaryRatioTol;
        rb["passed"] = ratio_ok;
        lines.push_back(std::string("ratio_bounds  ") + pf(ratio_ok) +
                        "  max_ratio=" + fmt6(max_ratio) + " (stationary flow)");
      }
      hyp["ratio_bounds"] = std::move(rb);
      if (!ratio_ok) hyp_failed = true;
      timings["ratio_bounds_ms"] = ms_since(t0);
    } else {
      hyp["rate"] = {{"skipped", true}, {"reason", "invariant measure unavailable"}};
      hyp["ratio_bounds"] = {{"skipped", true},
                             {"reason", "invariant measure unavailable"}};
      lines.push_back("rate          SKIP  invariant measure unavailable");
      lines.push_back("ratio_bounds  SKIP  invariant measure unavailable");
    }
  }
  hyp["passed"] = !hyp_failed;
  report["hypotheses"] = std::move(hyp);

  if (invariant_ok && (need_variance || want_mixing || want_oracle)) {
    const StochasticMatrix P_pi = evaluate(kernel, inv.pi);
    const double center = stationary_mean(inv.pi, f);

    VarianceReport vr;
    if (need_variance) {
      t0 = Clock::now();
      vr = asymptotic_variance(P_pi, inv.pi, f, run.tail_tolerance,
                               run.covariance_cap);
      timings["variance_ms"] = ms_since(t0);
    }
    if (want_variance) {
      const bool var_ok = vr.tail_geometric || vr.degenerate;
      json v;
      v["sigma2"] = vr.sigma2;
      v["var0"] = vr.var0;
      v["k_max"] = vr.k_max;
      v["tail_bound"] = vr.tail_bound;
      v["tail_geometric"] = vr.tail_geometric;
      v["degenerate"] = vr.degenerate;
      v["stationary_mean"] = center;
      v["passed"] = var_ok;
      conc["variance"] = std::move(v);
      if (!var_ok) conc_failed = true;
      lines.push_back(std::string("variance      ") + pf(var_ok) +
                      "  sigma2=" + fmt6(vr.sigma2) +
                      (vr.degenerate ? " (degenerate)" : ""));
      std::vector<std::string> rows;
      rows.reserve(vr.covariances.size() + 1);
      rows.push_back("0," + fmt17(vr.var0));
      for (std::size_t k = 0; k < vr.covariances.size(); ++k) {
        rows.push_back(std::to_string(k + 1) + "," + fmt17(vr.covariances[k]));
      }
      write_lines(out / "covariances.csv", "k,cov", rows);
    }

    if (want_mixing) {
      t0 = Clock::now();
      const MixingProfile mp =
          beta_mixing_profile(P_pi, inv.pi, run.mixing_n_max, run.zeta);
      const IlCheckResult il = ibragimov_linnik_check(mp, f);
      json m;
      m["n_max"] = run.mixing_n_max;
      m["beta_first"] = mp.beta.empty() ? 0.0 : mp.beta.front();
      m["beta_last"] = mp.beta.empty() ? 0.0 : mp.beta.back();
      m["fit_ratio"] = mp.fit_ratio;
      m["fit_r_squared"] = mp.fit_r_squared;
      m["zeta"] = mp.zeta;
      m["il"]["moment_value"] = il.moment_value;
      m["il"]["moment_finite"] = il.moment_finite;
      m["il"]["summable"] = il.summable;
      m["il"]["partial_sum_last"] = il.partial_sum_last;
      m["il"]["passed"] = il.passed;
      m["passed"] = il.passed;
      conc["mixing"] = std::move(m);
      if (!il.passed) conc_failed = true;
      lines.push_back(std::string("mixing        ") + pf(il.passed) +
                      "  beta_ratio=" + fmt6(mp.fit_ratio) +
                      " il_sum=" + fmt6(il.partial_sum_last));
      std::vector<std::string> rows;
      rows.reserve(mp.beta.size());
      for (std::size_t i = 0; i < mp.beta.size(); ++i) {
        rows.push_back(std::to_string(i + 1) + "," + fmt17(mp.beta[i]) + "," +
                       fmt17(mp.il_partial_sums[i]));
      }
      write_lines(out / "beta_profile.csv", "n,beta,il_partial_sum", rows);
      timings["mixing_ms"] = ms_since(t0);
    }

    if (want_clt || want_lln) {
      const StationaryContext ctx = make_stationary_context(inv.pi, vr, f);
      if (want_clt) {
        t0 = Clock::now();
        const CltThresholds thresholds;
        json c;
        bool clt_ok = false;
        try {
          const CltReport cr = clt_verify(
              kernel, mu0, f, ctx, run.n, run.trajectories,
              default_test_functions(), thresholds,
              salted_policy(run.seed, kCltSalt), run.threads);
          clt_ok = cr.passed;
          c["n"] = cr.n;
          c["trajectories"] = cr.trajectories;
          c["sigma2"] = cr.sigma2_theoretical;
          c["center"] = ctx.center;
          c["ks_distance"] = cr.ks_distance;
          c["ks_threshold"] = thresholds.ks;
          c["degenerate"] = cr.degenerate;
          json gaps = json::array();
          for (const auto& gap : cr.g_gaps) {
            gaps.push_back({{"name", gap.name},
                            {"empirical", gap.empirical},
                            {"expected", gap.expected},
                            {"gap", gap.gap}});
          }
          c["g_gaps"] = std::move(gaps);
          c["g_gap_threshold"] = thresholds.g_gap;
          c["passed"] = clt_ok;
          lines.push_back(std::string("clt           ") + pf(clt_ok) +
                          "  ks=" + fmt6(cr.ks_distance) +
                          (cr.degenerate ? " (degenerate)" : ""));
          std::vector<std::string> rows;
          rows.reserve(cr.samples.size());
          for (double s : cr.samples) rows.push_back(fmt17(s));
          write_lines(out / "samples.csv", "sample", rows);
        } catch (const DegenerateRequiresExactZero& e) {
          c["degenerate"] = true;
          c["error"] = e.what();
          c["passed"] = false;
          lines.push_back(std::string("clt           FAIL  ") + e.what());
        }
        if (!clt_ok) conc_failed = true;
        conc["clt"] = std::move(c);
        timings["clt_ms"] = ms_since(t0);
      }
      if (want_lln) {
        t0 = Clock::now();
        const LlnReport lr =
            lln_verify(kernel, mu0, f, ctx, run.n, run.trajectories,
                       salted_policy(run.seed, kLlnSalt), run.threads);
        json l;
        l["n"] = lr.n;
        l["trajectories"] = lr.trajectories;
        l["mean_abs"] = lr.mean_abs;
        l["max_abs"] = lr.max_abs;
        l["threshold"] = lr.threshold;
        l["passed"] = lr.passed;
        conc["lln"] = std::move(l);
        if (!lr.passed) conc_failed = true;
        lines.push_back(std::string("lln           ") + pf(lr.passed) +
                        "  mean|S_n/n|=" + fmt6(lr.mean_abs) +
                        " threshold=" + fmt6(lr.threshold));
        timings["lln_ms"] = ms_since(t0);
      }
    }

    if (want_oracle) {
      t0 = Clock::now();
      const int d = kernel.space().size();
      const int n_or = run.oracle_n > 0 ? run.oracle_n : auto_oracle_horizon(d);
      const auto atoms = exact_Sn_distribution(kernel, mu0, f, center, n_or);

      // Monte Carlo side, replicating the enumeration's arithmetic: per
      // trajectory, accumulate state-visit counts and sum
      // counts[y] * (f(y) - center) in ascending y, then scale by 1/sqrt(n).
      const LawFlow oracle_flow = iterate_law(kernel, mu0, n_or - 1);
      const TrajectorySampler sampler(kernel, oracle_flow, n_or - 1);
      const RngPolicy policy = salted_policy(run.seed, kOracleSalt);
      const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n_or));
      std::vector<double> samples(static_cast<std::size_t>(run.oracle_trajectories));
      std::vector<std::int32_t> traj(static_cast<std::size_t>(n_or));
      std::vector<long long> counts(static_cast<std::size_t>(d));
      for (int i = 0; i < run.oracle_trajectories; ++i) {
        auto eng = policy.stream(static_cast<std::uint64_t>(i));
        sampler.sample_into(eng, traj);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::int32_t s : traj) ++counts[static_cast<std::size_t>(s)];
        double s = 0.0;
        for (int y = 0; y < d; ++y) {
          s += static_cast<double>(counts[static_cast<std::size_t>(y)]) *
               (f.values[static_cast<std::size_t>(y)] - center);
        }
        samples[static_cast<std::size_t>(i)] = s * inv_sqrt_n;
      }
      const double gap = ks_distance_discrete(samples, atoms);
      const bool oracle_ok = gap <= kOracleKsGap;
      json o;
      o["n"] = n_or;
      o["trajectories"] = run.oracle_trajectories;
      o["atoms"] = atoms.size();
      o["center"] = center;
      o["ks_distance"] = gap;
      o["threshold"] = kOracleKsGap;
      o["passed"] = oracle_ok;
      conc["oracle"] = std::move(o);
      if (!oracle_ok) conc_failed = true;
      lines.push_back(std::string("oracle        ") + pf(oracle_ok) + "  n=" +
                      std::to_string(n_or) + " ks=" + fmt6(gap) + " atoms=" +
                      std::to_string(atoms.size()));
      std::vector<std::string> rows;
      rows.reserve(atoms.size());
      for (const auto& [value, probability] : atoms) {
        rows.push_back(fmt17(value) + "," + fmt17(probability));
      }
      write_lines(out / "oracle_cdf.csv", "value,probability", rows);
      timings["oracle_ms"] = ms_since(t0);
    }
  } else if (need_variance || want_mixing || want_oracle) {
    conc_skipped = true;
    const char* reason = "invariant measure unavailable";
    if (want_variance) conc["variance"] = {{"skipped", true}, {"reason", reason}};
    if (want_mixing) conc["mixing"] = {{"skipped", true}, {"reason", reason}};
    if (want_clt) conc["clt"] = {{"skipped", true}, {"reason", reason}};
    if (want_lln) conc["lln"] = {{"skipped", true}, {"reason", reason}};
    if (want_oracle) conc["oracle"] = {{"skipped", true}, {"reason", reason}};
    lines.push_back("conclusions   SKIP  invariant measure unavailable");
  }

  if (!conc.empty()) {
    conc["passed"] = !conc_failed && !conc_skipped;
    report["conclusions"] = std::move(conc);
  }

  const int exit_code = hyp_failed ? 2 : (conc_failed ? 3 : 0);
  report["verdict"]["passed"] = exit_code == 0;
  report["verdict"]["exit_code"] = exit_code;

  timings["requested_threads"] = run.threads;
  timings["hardware_concurrency"] = std::thread::hardware_concurrency();
  timings["total_ms"] = ms_since(t_total);
  report["timings"] = std::move(timings);

  RunResult result;
  result.exit_code = exit_code;
  result.report_json = report.dump(2) + "\n";
  {
    std::ofstream rep(out / "report.json", std::ios::binary | std::ios::trunc);
    if (!rep) throw Error("cannot write " + (out / "report.json").string());
    rep << result.report_json;
    if (!rep) throw Error("write failed for " + (out / "report.json").string());
  }

  std::string summary;
  for (const auto& line : lines) summary += line + "\n";
  summary += std::string("verdict: ") + (exit_code == 0 ? "PASS" : "FAIL") +
             " (exit " + std::to_string(exit_code) + ")\n";
  result.summary = std::move(summary);
  return result;
}

}  // namespace nmc
