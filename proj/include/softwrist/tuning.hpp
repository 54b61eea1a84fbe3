#pragma once

// Particle swarm search over the SMC gains in log10 space.

#include "softwrist/simulation.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace softwrist {

struct CostWeights {
  double error = 1.0;       // on RMSE(e), rad
  double chattering = 0.01; // on mean |delta tau| per step, N m
};

inline constexpr double kFailurePenalty = 1e6;

struct CostBreakdown {
  double cost = 0.0;
  double rmse = 0.0;
  double chattering = 0.0;
  bool failed = false;
};

CostBreakdown trace_cost(const SimulationTrace& trace, const CostWeights& w);
// Runs the scenario with the given gains under SMC; never throws on a
// simulation blow-up (penalty cost instead).
CostBreakdown tuning_cost(const SmcGains& gains, const Scenario& scenario, const CostWeights& w = {});

struct PsoConfig {
  int swarm_size = 20;
  int iterations = 50;
  double inertia = 0.72;
  double cognitive = 1.49;
  double social = 1.49;
  std::array<double, 3> lower = {1e-4, 1e-4, 1e-4};
  std::array<double, 3> upper = {1e4, 1e4, 1e4};
  // Fraction of the log-space range a particle may move per iteration.
  double max_velocity_fraction = 0.2;
  // Particle 0 starts here; the rest are drawn uniformly in log space.
  SmcGains initial = {1.0, 1.0, 1.0};
  CostWeights weights;
  std::uint64_t seed = 2024;

  void validate() const;
};

struct TuningIteration {
  int iteration = 0;
  double best_cost = 0.0;
  SmcGains best;
};

struct TuningResult {
  SmcGains best;
  double best_cost = 0.0;
  std::vector<TuningIteration> history;  // entry 0: the initial swarm
  std::vector<std::vector<SmcGains>> evaluated;  // every swarm position, per iteration
  long evaluations = 0;
};

// Swarm costs for one iteration; the variants differ only in scheduling.
std::vector<CostBreakdown> evaluate_swarm(const std::vector<SmcGains>& particles, const Scenario& scenario,
                                          const CostWeights& w);
std::vector<CostBreakdown> evaluate_swarm_parallel(const std::vector<SmcGains>& particles,
                                                   const Scenario& scenario, const CostWeights& w);

enum class SwarmEvaluation { kParallel, kSerial };

TuningResult pso_tune(const PsoConfig& config, const Scenario& scenario,
                      SwarmEvaluation mode = SwarmEvaluation::kParallel);

void write_tuning_history_csv(const TuningResult& result, const std::string& path);

}  // namespace softwrist
