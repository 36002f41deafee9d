#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nmc/chain_spec.hpp"
#include "nmc/runner.hpp"

namespace {

const char* error_type(const nmc::Error& e) {
  if (dynamic_cast<const nmc::SpecSyntaxError*>(&e)) return "SpecSyntaxError";
  if (dynamic_cast<const nmc::SpecSemanticError*>(&e)) return "SpecSemanticError";
  if (dynamic_cast<const nmc::TooLarge*>(&e)) return "TooLarge";
  if (dynamic_cast<const nmc::NotInvariant*>(&e)) return "NotInvariant";
  if (dynamic_cast<const nmc::ZeroInvariantEntry*>(&e)) return "ZeroInvariantEntry";
  if (dynamic_cast<const nmc::DimensionMismatch*>(&e)) return "DimensionMismatch";
  if (dynamic_cast<const nmc::RowNotStochastic*>(&e)) return "RowNotStochastic";
  return "Error";
}

int fail_json(const std::string& type, const std::string& message) {
  nlohmann::json err;
  err["error"]["type"] = type;
  err["error"]["message"] = message;
  std::cout << err.dump() << "\n";
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"verification toolkit for finite-state nonlinear Markov chains"};
  app.set_version_flag("--version", "nmc 0.1.0");
  app.fallthrough();
  app.require_subcommand(1);

  std::string spec_path;
  const char* env_out = std::getenv("NMC_OUT_DIR");
  std::string out_dir = env_out ? env_out : "nmc_out";
  std::uint64_t seed_v = 0;
  int threads_v = 0;
  long long n_v = 0;
  int m_v = 0;

  app.add_option("--spec", spec_path, "chain specification, JSON")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--out", out_dir,
                 "output directory for report.json and the CSV tables");
  auto* seed_o = app.add_option("--seed", seed_v, "override run.seed");
  auto* threads_o = app.add_option("--threads", threads_v,
                                   "override run.threads (0 = all cores)");
  auto* n_o = app.add_option("--n", n_v, "override run.n (statistic horizon)");
  auto* m_o = app.add_option("--m", m_v, "override run.trajectories");

  const std::vector<std::pair<std::string, std::string>> subcommands = {
      {"hypotheses",
       "minorization, invariant measure, convergence rate, kernel-ratio bounds"},
      {"variance", "asymptotic variance sigma^2 from the covariance series"},
      {"mixing", "beta-mixing profile and the moment/summability check"},
      {"clt", "distribution of S_n/sqrt(n) against N(0, sigma^2)"},
      {"lln", "S_n/n concentration at the stationary mean"},
      {"oracle", "Monte Carlo sampler against the exact S_n distribution"},
      {"all", "every check; hypothesis failures dominate the exit code"}};
  for (const auto& [name, description] : subcommands) {
    app.add_subcommand(name, description);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail_json("UsageError", e.what());
  }

  const std::string sub = app.get_subcommands().front()->get_name();

  try {
    nmc::ChainSpec spec = nmc::parse_spec_file(spec_path);
    if (seed_o->count() > 0) spec.run.seed = seed_v;
    if (threads_o->count() > 0) spec.run.threads = threads_v;
    if (n_o->count() > 0) spec.run.n = n_v;
    if (m_o->count() > 0) spec.run.trajectories = m_v;

    const nmc::RunResult result = nmc::run_subcommand(sub, spec, out_dir);
    std::cout << result.summary;
    std::cout << "report: "
              << (std::filesystem::path(out_dir) / "report.json").string()
              << "\n";
    return result.exit_code;
  } catch (const nmc::Error& e) {
    return fail_json(error_type(e), e.what());
  } catch (const std::exception& e) {
    return fail_json("Error", e.what());
  }
}
