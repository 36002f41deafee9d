#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <utility>
#include <vector>

#include "nmc/chain_spec.hpp"
#include "nmc/flow.hpp"
#include "nmc/montecarlo.hpp"
#include "nmc/runner.hpp"

namespace py = pybind11;

namespace {

nmc::ChainSpec spec_of(const std::string& text) {
  return nmc::parse_spec_text(text, "<python>");
}

std::vector<std::vector<double>> matrix_rows(const nmc::StochasticMatrix& P) {
  std::vector<std::vector<double>> rows;
  rows.reserve(static_cast<std::size_t>(P.size()));
  for (int x = 0; x < P.size(); ++x) {
    rows.emplace_back(P.row(x).begin(), P.row(x).end());
  }
  return rows;
}

}  // namespace

PYBIND11_MODULE(nmc, m) {
  m.doc() =
      "Finite-state nonlinear Markov chains: exact law flows, invariant "
      "measures, and central-limit verification. Every function takes the "
      "chain spec as JSON text.";

  py::register_exception<nmc::Error>(m, "NmcError");

  m.def(
      "canonical_spec",
      [](const std::string& spec_json) {
        return nmc::serialize_spec(spec_of(spec_json));
      },
      py::arg("spec_json"),
      "Parse and validate a spec, returning it with every default explicit.");

  m.def(
      "evaluate_kernel",
      [](const std::string& spec_json, std::vector<double> mu) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        return matrix_rows(
            nmc::evaluate(kernel, nmc::MeasureVector(std::move(mu))));
      },
      py::arg("spec_json"), py::arg("mu"),
      "Transition matrix P^mu as a list of rows.");

  m.def(
      "law_flow",
      [](const std::string& spec_json, int steps) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        const nmc::LawFlow flow = nmc::iterate_law(kernel, spec.to_mu0(), steps);
        std::vector<std::vector<double>> out;
        out.reserve(flow.measures.size());
        for (const auto& mu : flow.measures) out.push_back(mu.weights());
        return out;
      },
      py::arg("spec_json"), py::arg("steps"),
      "The exact law flow mu_0..mu_steps as a list of weight vectors.");

  m.def(
      "invariant_measure",
      [](const std::string& spec_json) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        const nmc::InvariantResult inv = nmc::find_invariant(
            kernel, spec.run.invariant_tolerance, spec.run.max_iterations);
        py::dict out;
        out["pi"] = inv.pi.weights();
        out["residual"] = inv.residual;
        out["iterations"] = inv.iterations;
        out["unique_within_tolerance"] = inv.unique_within_tolerance;
        out["converged"] = inv.converged;
        return out;
      },
      py::arg("spec_json"),
      "Multi-start fixed point of the law map with convergence diagnostics.");

  m.def(
      "asymptotic_variance",
      [](const std::string& spec_json) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        const nmc::ObservableF f = spec.to_observable();
        const nmc::InvariantResult inv = nmc::find_invariant(
            kernel, spec.run.invariant_tolerance, spec.run.max_iterations);
        const nmc::VarianceReport vr = nmc::asymptotic_variance(
            nmc::evaluate(kernel, inv.pi), inv.pi, f, spec.run.tail_tolerance,
            spec.run.covariance_cap);
        py::dict out;
        out["sigma2"] = vr.sigma2;
        out["var0"] = vr.var0;
        out["covariances"] = vr.covariances;
        out["tail_geometric"] = vr.tail_geometric;
        out["degenerate"] = vr.degenerate;
        out["stationary_mean"] = nmc::stationary_mean(inv.pi, f);
        return out;
      },
      py::arg("spec_json"),
      "sigma^2 for S_n/sqrt(n) from the stationary covariance series.");

  m.def(
      "sample_trajectories",
      [](const std::string& spec_json, int n, int trajectories,
         std::uint64_t seed) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        const nmc::LawFlow flow = nmc::iterate_law(kernel, spec.to_mu0(), n);
        const nmc::TrajectoryBatch batch = nmc::sample_batch(
            kernel, flow, n, trajectories, nmc::RngPolicy{seed},
            spec.run.threads);
        std::vector<std::vector<int>> out;
        out.reserve(static_cast<std::size_t>(trajectories));
        for (int i = 0; i < trajectories; ++i) {
          const auto t = batch.trajectory(i);
          out.emplace_back(t.begin(), t.end());
        }
        return out;
      },
      py::arg("spec_json"), py::arg("n"), py::arg("trajectories"),
      py::arg("seed"),
      "Trajectories of n+1 states each, sampled against the exact law flow.");

  m.def(
      "exact_statistic_distribution",
      [](const std::string& spec_json, int n) {
        const nmc::ChainSpec spec = spec_of(spec_json);
        const nmc::NonlinearKernel kernel = spec.to_kernel();
        const nmc::ObservableF f = spec.to_observable();
        const nmc::InvariantResult inv = nmc::find_invariant(
            kernel, spec.run.invariant_tolerance, spec.run.max_iterations);
        return nmc::exact_Sn_distribution(kernel, spec.to_mu0(), f,
                                          nmc::stationary_mean(inv.pi, f), n);
      },
      py::arg("spec_json"), py::arg("n"),
      "Atoms (value, probability) of the exact S_n/sqrt(n) distribution.");

  m.def(
      "run",
      [](const std::string& subcommand, const std::string& spec_json,
         const std::string& out_dir) {
        const nmc::RunResult result =
            nmc::run_subcommand(subcommand, spec_of(spec_json), out_dir);
        py::dict out;
        out["exit_code"] = result.exit_code;
        out["report_json"] = result.report_json;
        out["summary"] = result.summary;
        return out;
      },
      py::arg("subcommand"), py::arg("spec_json"), py::arg("out_dir"),
      "One verification subcommand; writes report.json and CSVs to out_dir.");
}
