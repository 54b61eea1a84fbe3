#pragma once

// Run configuration: a JSON document with sections wrist, scenario, smc, pid,
// training and tuning. Files are merged over the built-in defaults; unknown
// keys are rejected. The merged document is what gets echoed next to outputs.

#include "softwrist/neural_ik.hpp"
#include "softwrist/simulation.hpp"
#include "softwrist/tuning.hpp"

#include "json.hpp"

#include <optional>
#include <string>
#include <vector>

namespace softwrist {

inline constexpr const char* kConfigEnvVar = "SOFTWRIST_CONFIG";

struct RunConfig {
  nlohmann::json effective;  // merged document, echoed verbatim
  Scenario scenario;         // ik left empty until load_ik_model()
  std::optional<std::string> ik_model_path;
  DatasetConfig dataset;
  TrainingConfig training;
  PsoConfig pso;
  double tuning_duration = 3.0;  // s
  double tuning_step = 5e-4;     // s
};

nlohmann::json default_config_json();

// Applies "a.b.c=value" (value parsed as JSON, else taken as a string).
void apply_override(nlohmann::json& doc, const std::string& assignment);

// Throws ConfigError on unknown keys, wrong types or invalid values.
RunConfig parse_config(const nlohmann::json& document);
nlohmann::json read_config_file(const std::string& path);
RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides = {});

// Resolves scenario.ik_model; MissingArtifact when the file is absent.
void load_ik_model(RunConfig& config);

// The scenario used for tuning: SMC, shortened to the tuning horizon.
Scenario tuning_scenario(const RunConfig& config);

void write_config_echo(const RunConfig& config, const std::string& path);

}  // namespace softwrist
