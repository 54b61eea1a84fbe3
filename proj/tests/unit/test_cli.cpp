#include "softwrist/commands.hpp"
#include "softwrist/trace_io.hpp"

#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

namespace fs = std::filesystem;
using softwrist::cli::run;

namespace {

struct Outcome {
  int code;
  std::string out, err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "softwrist");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("softwrist_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> metrics(const fs::path& p) {
  std::map<std::string, std::string> kv;
  std::ifstream f(p);
  std::string line;
  while (std::getline(f, line)) {
    const auto eq = line.find(" = ");
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 3);
  }
  return kv;
}

const std::string kShort = "scenario.duration_s=0.5";

}  // namespace

TEST_CASE("simulate writes trace, plots, metrics and the config echo") {
  const fs::path out = scratch("simulate");
  const Outcome r = invoke({"simulate", "--set", kShort, "--set", "scenario.step_s=5e-4", "-o", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  for (const char* f : {"config.json", "traces/trace.csv", "plots/error.svg", "plots/theta.svg", "metrics.txt"}) {
    CHECK_MESSAGE(fs::exists(out / f), f);
  }
  const auto kv = metrics(out / "metrics.txt");
  CHECK(kv.at("controller") == "smc");
  CHECK(kv.at("failed") == "false");
  CHECK(kv.at("rows") == "1001");

  // Re-running from the echoed config reproduces the trace byte for byte.
  const fs::path again = scratch("simulate_again");
  const Outcome r2 = invoke({"simulate", "-c", (out / "config.json").string(), "-o", again.string()});
  REQUIRE(r2.code == 0);
  CHECK(slurp(out / "traces/trace.csv") == slurp(again / "traces/trace.csv"));
}

TEST_CASE("exit codes: config error and missing artifact") {
  const fs::path out = scratch("codes");
  Outcome r = invoke({"simulate", "--set", "scenario.nonsense=1", "-o", out.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("scenario.nonsense") != std::string::npos);

  r = invoke({"simulate", "--set", "scenario.ik_model=/nonexistent/ik.json", "-o", out.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/ik.json") != std::string::npos);

  r = invoke({"simulate", "--controller", "fuzzy", "-o", out.string()});
  CHECK(r.code == 1);

  r = invoke({"frobnicate"});
  CHECK(r.code == 1);
}

TEST_CASE("the environment variable supplies the default config") {
  const fs::path out = scratch("env");
  fs::create_directories(out);
  {
    std::ofstream(out / "env.json") << R"({"scenario": {"controller": "pid", "duration_s": 0.2, "step_s": 1e-3}})";
  }
  ::setenv("SOFTWRIST_CONFIG", (out / "env.json").string().c_str(), 1);
  const Outcome r = invoke({"simulate", "-o", (out / "run").string()});
  ::unsetenv("SOFTWRIST_CONFIG");
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(metrics(out / "run/metrics.txt").at("controller") == "pid");
}

TEST_CASE("simulation blow-up is a runtime error with a truncated trace") {
  const fs::path out = scratch("blowup");
  const Outcome r = invoke({"simulate", "--set", "scenario.integrator=rk4", "--set", "scenario.step_s=1e-3", "--set",
                            kShort, "-o", out.string()});
  CHECK(r.code == 3);
  CHECK(metrics(out / "metrics.txt").at("failed") == "true");
  CHECK(fs::exists(out / "traces/trace.csv"));
}

TEST_CASE("compare: SMC steady state beats PID on the default scenario") {
  const fs::path out = scratch("compare");
  const Outcome r = invoke({"compare", "-o", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const auto kv = metrics(out / "metrics.txt");
  CHECK(std::stod(kv.at("smc.steady_state_error_rad")) < std::stod(kv.at("pid.steady_state_error_rad")));
  CHECK(std::stod(kv.at("smc.settling_time_s")) < std::stod(kv.at("pid.settling_time_s")));
}

// Known mismatch: with a step reference the SMC reaches the surface at a
// bounded rate, so its RMSE over the transient exceeds the PID's. Kept as an
// expected failure so a change in that direction shows up.
TEST_CASE("simulate --controller pid reports a larger RMSE than smc" * doctest::should_fail()) {
  const fs::path a = scratch("rmse_smc"), b = scratch("rmse_pid");
  REQUIRE(invoke({"simulate", "--controller", "smc", "-o", a.string()}).code == 0);
  REQUIRE(invoke({"simulate", "--controller", "pid", "-o", b.string()}).code == 0);
  CHECK(std::stod(metrics(b / "metrics.txt").at("rmse_rad")) > std::stod(metrics(a / "metrics.txt").at("rmse_rad")));
}

TEST_CASE("train-ik with zero epochs still writes a usable model") {
  const fs::path out = scratch("train");
  const Outcome r = invoke({"train-ik", "--set", "training.epochs=0", "--set", "training.samples=200", "--set",
                            "training.train_samples=150", "-o", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  CHECK(fs::exists(out / "models/ik_model.json"));
  CHECK(fs::exists(out / "models/training_report.csv"));

  const fs::path sim = scratch("train_sim");
  const Outcome s = invoke({"simulate", "--set", "scenario.ik_model=" + (out / "models/ik_model.json").string(), "--set",
                            "scenario.duration_s=0.1", "-o", sim.string()});
  CHECK_MESSAGE(s.code == 0, s.err);
}

TEST_CASE("tune with zero iterations and one particle returns the initial gains") {
  const fs::path out = scratch("tune");
  const Outcome r = invoke({"tune", "--set", "tuning.iterations=0", "--set", "tuning.swarm_size=1", "--set",
                            "tuning.duration_s=0.2", "-o", out.string()});
  REQUIRE_MESSAGE(r.code == 0, r.err);
  const std::string history = slurp(out / "traces/tuning_history.csv");
  CHECK(history.rfind("iteration,best_cost,best_P1,best_P2,best_P3\n0,", 0) == 0);
  CHECK(history.find(",1,1,1\n") != std::string::npos);
  CHECK(fs::exists(out / "models/best_gains.json"));
}

TEST_CASE("reproduce is bit-identical across runs and validates its arguments") {
  const fs::path a = scratch("rep_a"), b = scratch("rep_b");
  const std::vector<std::string> common = {"reproduce", "--figure", "error-ulnar", "--set", "scenario.duration_s=1"};
  auto args_a = common, args_b = common;
  args_a.insert(args_a.end(), {"-o", a.string()});
  args_b.insert(args_b.end(), {"-o", b.string()});
  REQUIRE(invoke(args_a).code == 0);
  REQUIRE(invoke(args_b).code == 0);
  CHECK(slurp(a / "traces/error_ulnar.csv") == slurp(b / "traces/error_ulnar.csv"));
  CHECK(!slurp(a / "traces/error_ulnar.csv").empty());

  CHECK(invoke({"reproduce", "-o", a.string()}).code == 1);
  CHECK(invoke({"reproduce", "--table", "smc-vs-pid", "--figure", "error-ulnar", "-o", a.string()}).code == 1);
  CHECK(invoke({"reproduce", "--table", "nope", "-o", a.string()}).code == 1);
}
