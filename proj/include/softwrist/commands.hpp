#pragma once

// Subcommands of the softwrist executable. Each returns a process exit code.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace softwrist::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kMissingArtifact = 2, kRuntimeError = 3 };

struct CommonOptions {
  std::optional<std::string> config;   // falls back to $SOFTWRIST_CONFIG, then built-in defaults
  std::vector<std::string> overrides;  // key.path=value
  std::string out = "out";
  std::optional<std::uint64_t> seed;
};

struct SimulateOptions {
  CommonOptions common;
  std::optional<std::string> controller;
  std::optional<std::string> direction;
};

struct TrainOptions {
  CommonOptions common;
  std::optional<std::string> model_path;  // default <out>/models/ik_model.json
};

struct TuneOptions {
  CommonOptions common;
  bool serial = false;
};

struct ReproduceOptions {
  CommonOptions common;
  std::optional<std::string> table;   // smc-vs-pid
  std::optional<std::string> figure;  // error-ulnar
};

int cmd_simulate(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_train_ik(const TrainOptions& opt, std::ostream& out, std::ostream& err);
int cmd_tune(const TuneOptions& opt, std::ostream& out, std::ostream& err);
int cmd_compare(const SimulateOptions& opt, std::ostream& out, std::ostream& err);
int cmd_reproduce(const ReproduceOptions& opt, std::ostream& out, std::ostream& err);

// Full argument parsing; argv[0] is the program name.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace softwrist::cli
