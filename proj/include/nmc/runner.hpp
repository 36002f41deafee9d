#pragma once

#include <string>

#include "nmc/chain_spec.hpp"

namespace nmc {

/// Exit codes: 0 all requested checks passed, 2 a hypothesis check failed,
/// 3 every hypothesis held but a conclusion check failed. Operational
/// problems (bad spec, unwritable output) surface as exceptions; the CLI
/// maps them to exit 1.
struct RunResult {
  int exit_code = 0;
  std::string report_json;  // the full report, as written to report.json
  std::string summary;      // short human-readable verdict lines
};

/// Runs one verification subcommand (hypotheses | variance | mixing | clt |
/// lln | oracle | all) and writes report.json plus the relevant CSV tables
/// into out_dir. The report in the result is byte-identical to the file.
/// Everything outside the "timings" object is a pure function of the spec.
RunResult run_subcommand(const std::string& subcommand,
                         const ChainSpec& spec,
                         const std::string& out_dir);

}  // namespace nmc
