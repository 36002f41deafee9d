#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "nmc/chain_spec.hpp"
#include "nmc/errors.hpp"
#include "nmc/runner.hpp"

using namespace nmc;
using nlohmann::json;

namespace {

const char* kConstantSpec = R"({
  "schema_version": 1,
  "state_space": {"size": 2},
  "kernel": {"family": "constant", "matrix": [[0.9, 0.1], [0.2, 0.8]]},
  "observable": {"name": "indicator_1", "values": [0.0, 1.0]}
})";

const char* kViolationSpec = R"({
  "schema_version": 1,
  "state_space": {"size": 2},
  "kernel": {
    "family": "affine_mixture",
    "base": [[0.5, 0.5], [0.5, 0.5]],
    "feedback": [[1.0, 0.0], [0.0, 1.0]],
    "lambda": 1.0
  },
  "observable": {"values": [0.0, 1.0]}
})";

struct ScratchDir {
  std::filesystem::path path;
  ScratchDir() {
    path = std::filesystem::temp_directory_path() /
           ("nmc_spec_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~ScratchDir() { std::filesystem::remove_all(path); }
  std::string str() const { return path.string(); }
};

json strip_timings(const std::string& report) {
  json j = json::parse(report);
  j.erase("timings");
  return j;
}

}  // namespace

TEST_CASE("parsing fills documented defaults") {
  const ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  CHECK(spec.size == 2);
  CHECK(spec.family == "constant");
  CHECK(spec.observable_name == "indicator_1");
  CHECK(spec.initial_measure.empty());  // barycenter
  CHECK(spec.run.n == 10000);
  CHECK(spec.run.trajectories == 10000);
  CHECK(spec.run.seed == 12345);
  CHECK(spec.run.invariant_tolerance == 1e-12);
  CHECK(spec.run.mixing_n_max == 60);
  CHECK(spec.to_mu0()[0] == doctest::Approx(0.5));
}

TEST_CASE("serialize then parse is the identity") {
  ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  spec.run.n = 777;
  spec.run.seed = 99;
  const std::string text = serialize_spec(spec);
  const ChainSpec back = parse_spec_text(text, "round-trip");
  CHECK(back == spec);
  CHECK(serialize_spec(back) == text);
}

TEST_CASE("spec files parse the same as inline text") {
  ScratchDir dir;
  const auto file = dir.path / "chain.json";
  std::ofstream(file) << kConstantSpec;
  const ChainSpec a = parse_spec_file(file.string());
  const ChainSpec b = parse_spec_text(kConstantSpec, "inline");
  CHECK(a == b);
}

TEST_CASE("syntax errors carry the origin and location") {
  try {
    parse_spec_text("{\"schema_version\": 1,", "broken.json");
    FAIL("expected SpecSyntaxError");
  } catch (const SpecSyntaxError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("broken.json") != std::string::npos);
  }
}

TEST_CASE("semantic errors name the offending field") {
  auto expect_semantic = [](const char* text, const char* needle) {
    try {
      parse_spec_text(text, "inline");
      FAIL_CHECK("expected SpecSemanticError for ", needle);
    } catch (const SpecSemanticError& e) {
      const std::string msg = e.what();
      CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
    }
  };

  expect_semantic(R"({"schema_version": 2, "state_space": {"size": 2},
                      "kernel": {"family": "constant", "matrix": [[1.0, 0.0], [0.0, 1.0]]},
                      "observable": {"values": [0.0, 1.0]}})",
                  "schema_version");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 1},
                      "kernel": {"family": "constant", "matrix": [[1.0]]},
                      "observable": {"values": [0.0]}})",
                  "size");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 2},
                      "kernel": {"family": "constant", "matrix": [[0.9, 0.2], [0.2, 0.8]]},
                      "observable": {"values": [0.0, 1.0]}})",
                  "matrix");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 2},
                      "kernel": {"family": "affine_mixture",
                                 "base": [[0.5, 0.5], [0.5, 0.5]],
                                 "feedback": [[0.5, 0.5], [0.5, 0.5]],
                                 "lambda": 1.5},
                      "observable": {"values": [0.0, 1.0]}})",
                  "lambda");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 2},
                      "kernel": {"family": "constant", "matrix": [[0.9, 0.1], [0.2, 0.8]]},
                      "observable": {"values": [0.0, 1.0]},
                      "run": {"n": 0}})",
                  "run.n");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 2},
                      "kernel": {"family": "constant", "matrix": [[0.9, 0.1], [0.2, 0.8]]},
                      "observable": {"values": [0.0, 1.0]},
                      "surprise": true})",
                  "surprise");
  expect_semantic(R"({"schema_version": 1, "state_space": {"size": 2},
                      "kernel": {"family": "constant", "matrix": [[0.9, 0.1], [0.2, 0.8]]},
                      "initial_measure": [0.5, 0.5, 0.0],
                      "observable": {"values": [0.0, 1.0]}})",
                  "initial_measure");
}

TEST_CASE("runner verdict and exit code on a healthy chain") {
  ScratchDir dir;
  ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  const RunResult res = run_subcommand("hypotheses", spec, dir.str());
  CHECK(res.exit_code == 0);

  const json rep = json::parse(res.report_json);
  CHECK(rep["subcommand"] == "hypotheses");
  CHECK(rep["hypotheses"]["passed"] == true);
  CHECK(rep["hypotheses"]["minorization"]["passed"] == true);
  CHECK(rep["hypotheses"]["invariant"]["unique_within_tolerance"] == true);
  CHECK(rep["verdict"]["exit_code"] == 0);
  CHECK_FALSE(rep.contains("conclusions"));

  // report file is byte-identical to the returned string
  std::ifstream in(dir.path / "report.json");
  const std::string on_disk((std::istreambuf_iterator<char>(in)),
                            std::istreambuf_iterator<char>());
  CHECK(on_disk == res.report_json);
  CHECK(std::filesystem::exists(dir.path / "flow_tv.csv"));
  CHECK(std::filesystem::exists(dir.path / "ratio_bounds.csv"));
}

TEST_CASE("runner flags hypothesis violations with exit 2") {
  ScratchDir dir;
  const ChainSpec spec = parse_spec_text(kViolationSpec, "inline");
  for (const char* sub : {"hypotheses", "variance", "all"}) {
    const RunResult res = run_subcommand(sub, spec, dir.str());
    CHECK_MESSAGE(res.exit_code == 2, sub);
    const json rep = json::parse(res.report_json);
    CHECK(rep["hypotheses"]["passed"] == false);
    CHECK(rep["hypotheses"]["invariant"]["unique_within_tolerance"] == false);
    if (std::string(sub) != "variance") {
      CHECK(rep["hypotheses"]["minorization"]["passed"] == false);
    }
  }
}

TEST_CASE("conclusion failures alone exit 3") {
  ScratchDir dir;
  ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  spec.run.mixing_n_max = 3;  // too short to certify a geometric beta tail
  const RunResult res = run_subcommand("mixing", spec, dir.str());
  CHECK(res.exit_code == 3);
  const json rep = json::parse(res.report_json);
  CHECK(rep["hypotheses"]["passed"] == true);
  CHECK(rep["conclusions"]["mixing"]["passed"] == false);

  ChainSpec capped = parse_spec_text(kConstantSpec, "inline");
  capped.run.covariance_cap = 6;  // tail never certified geometric
  const RunResult res2 = run_subcommand("variance", capped, dir.str());
  CHECK(res2.exit_code == 3);
  const json rep2 = json::parse(res2.report_json);
  CHECK(rep2["conclusions"]["variance"]["tail_geometric"] == false);
}

TEST_CASE("reports are deterministic outside the timing block") {
  ScratchDir dir;
  ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  spec.run.n = 400;
  spec.run.trajectories = 500;
  const RunResult a = run_subcommand("clt", spec, (dir.path / "a").string());
  const RunResult b = run_subcommand("clt", spec, (dir.path / "b").string());
  CHECK(strip_timings(a.report_json) == strip_timings(b.report_json));

  ChainSpec reseeded = spec;
  reseeded.run.seed = 54321;
  const RunResult c = run_subcommand("clt", reseeded, (dir.path / "c").string());
  CHECK_FALSE(strip_timings(a.report_json) == strip_timings(c.report_json));
}

TEST_CASE("unknown subcommand is an operational error") {
  ScratchDir dir;
  const ChainSpec spec = parse_spec_text(kConstantSpec, "inline");
  CHECK_THROWS_AS(run_subcommand("frobnicate", spec, dir.str()), Error);
}
