#include "softwrist/tuning.hpp"

#include "softwrist/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

namespace softwrist {

namespace {

using Position = std::array<double, 3>;

Position to_log(const SmcGains& g) { return {std::log10(g.P1), std::log10(g.P2), std::log10(g.P3)}; }

SmcGains from_log(const Position& p) {
  return {std::pow(10.0, p[0]), std::pow(10.0, p[1]), std::pow(10.0, p[2])};
}

// Lexicographic (cost, index) so the reduction does not depend on evaluation order.
bool better(double cost_a, std::size_t idx_a, double cost_b, std::size_t idx_b) {
  return cost_a < cost_b || (cost_a == cost_b && idx_a < idx_b);
}

}  // namespace

CostBreakdown trace_cost(const SimulationTrace& trace, const CostWeights& w) {
  CostBreakdown c;
  if (trace.failed || trace.e.empty()) {
    c.failed = true;
    c.cost = kFailurePenalty;
    return c;
  }
  double ss = 0.0;
  for (double e : trace.e) ss += e * e;
  c.rmse = std::sqrt(ss / static_cast<double>(trace.e.size()));
  double dtau = 0.0;
  for (std::size_t i = 1; i < trace.tau.size(); ++i) dtau += std::abs(trace.tau[i] - trace.tau[i - 1]);
  c.chattering = trace.tau.size() > 1 ? dtau / static_cast<double>(trace.tau.size() - 1) : 0.0;
  c.cost = w.error * c.rmse + w.chattering * c.chattering;
  if (!std::isfinite(c.cost)) {
    c.failed = true;
    c.cost = kFailurePenalty;
  }
  return c;
}

CostBreakdown tuning_cost(const SmcGains& gains, const Scenario& scenario, const CostWeights& w) {
  Scenario s = scenario;
  s.controller = ControllerKind::kSmc;
  s.smc.gains = gains;
  try {
    return trace_cost(run_episode(s), w);
  } catch (const Error&) {
    CostBreakdown c;
    c.failed = true;
    c.cost = kFailurePenalty;
    return c;
  }
}

void PsoConfig::validate() const {
  if (swarm_size < 1) throw InvalidParameter("swarm size must be >= 1");
  if (iterations < 0) throw InvalidParameter("iterations must be >= 0");
  for (int i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (!(lower[ui] > 0.0) || !(upper[ui] > lower[ui])) {
      throw InvalidParameter("PSO bounds must be positive with lower < upper");
    }
  }
  const Position p0 = to_log(initial);
  for (int i = 0; i < 3; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    if (!(p0[ui] >= std::log10(lower[ui]) - 1e-12 && p0[ui] <= std::log10(upper[ui]) + 1e-12)) {
      throw InvalidParameter("initial PSO gains must lie inside the bounds");
    }
  }
  if (!(max_velocity_fraction > 0.0)) throw InvalidParameter("velocity clamp must be positive");
}

std::vector<CostBreakdown> evaluate_swarm(const std::vector<SmcGains>& particles, const Scenario& scenario,
                                          const CostWeights& w) {
  std::vector<CostBreakdown> out(particles.size());
  for (std::size_t i = 0; i < particles.size(); ++i) out[i] = tuning_cost(particles[i], scenario, w);
  return out;
}

std::vector<CostBreakdown> evaluate_swarm_parallel(const std::vector<SmcGains>& particles,
                                                   const Scenario& scenario, const CostWeights& w) {
  std::vector<CostBreakdown> out(particles.size());
  const auto n = static_cast<long>(particles.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    out[ui] = tuning_cost(particles[ui], scenario, w);
  }
  return out;
}

TuningResult pso_tune(const PsoConfig& config, const Scenario& scenario, SwarmEvaluation mode) {
  config.validate();
  scenario.validate();
  const auto n = static_cast<std::size_t>(config.swarm_size);
  Position lo, hi, vmax;
  for (std::size_t d = 0; d < 3; ++d) {
    lo[d] = std::log10(config.lower[d]);
    hi[d] = std::log10(config.upper[d]);
    vmax[d] = config.max_velocity_fraction * (hi[d] - lo[d]);
  }

  std::mt19937_64 rng(config.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Position> x(n), v(n), pbest(n);
  std::vector<double> pbest_cost(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < 3; ++d) {
      x[i][d] = lo[d] + unit(rng) * (hi[d] - lo[d]);
      v[i][d] = (2.0 * unit(rng) - 1.0) * vmax[d];
    }
  }
  x[0] = to_log(config.initial);
  for (std::size_t d = 0; d < 3; ++d) x[0][d] = std::clamp(x[0][d], lo[d], hi[d]);

  TuningResult result;
  auto evaluate = [&](const std::vector<Position>& pos) {
    std::vector<SmcGains> gains(pos.size());
    std::transform(pos.begin(), pos.end(), gains.begin(), from_log);
    result.evaluated.push_back(gains);
    auto costs = mode == SwarmEvaluation::kParallel ? evaluate_swarm_parallel(gains, scenario, config.weights)
                                                    : evaluate_swarm(gains, scenario, config.weights);
    std::vector<double> c(costs.size());
    std::transform(costs.begin(), costs.end(), c.begin(), [](const CostBreakdown& b) { return b.cost; });
    return c;
  };

  std::vector<double> cost = evaluate(x);
  result.evaluations += static_cast<long>(n);
  std::size_t gbest = 0;
  for (std::size_t i = 0; i < n; ++i) {
    pbest[i] = x[i];
    pbest_cost[i] = cost[i];
    if (better(cost[i], i, cost[gbest], gbest)) gbest = i;
  }
  Position g = pbest[gbest];
  double g_cost = pbest_cost[gbest];
  result.history.push_back({0, g_cost, from_log(g)});

  for (int it = 1; it <= config.iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 3; ++d) {
        const double r1 = unit(rng), r2 = unit(rng);
        double vel = config.inertia * v[i][d] + config.cognitive * r1 * (pbest[i][d] - x[i][d]) +
                     config.social * r2 * (g[d] - x[i][d]);
        vel = std::clamp(vel, -vmax[d], vmax[d]);
        double pos = x[i][d] + vel;
        // Reflect off the walls and turn the velocity around.
        if (pos > hi[d]) {
          pos = hi[d] - (pos - hi[d]);
          vel = -vel;
        } else if (pos < lo[d]) {
          pos = lo[d] + (lo[d] - pos);
          vel = -vel;
        }
        x[i][d] = std::clamp(pos, lo[d], hi[d]);
        v[i][d] = vel;
      }
    }
    cost = evaluate(x);
    result.evaluations += static_cast<long>(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (better(cost[i], i, pbest_cost[i], n)) {
        pbest[i] = x[i];
        pbest_cost[i] = cost[i];
      }
    }
    std::size_t best_i = 0;
    for (std::size_t i = 1; i < n; ++i) {
      if (better(pbest_cost[i], i, pbest_cost[best_i], best_i)) best_i = i;
    }
    if (pbest_cost[best_i] < g_cost) {
      g = pbest[best_i];
      g_cost = pbest_cost[best_i];
    }
    result.history.push_back({it, g_cost, from_log(g)});
  }
  result.best = from_log(g);
  result.best_cost = g_cost;
  // Particle 0 sits exactly on the initial gains; report them unrounded.
  if (g == to_log(config.initial)) result.best = config.initial;
  for (auto& h : result.history) {
    if (to_log(h.best) == to_log(config.initial)) h.best = config.initial;
  }
  return result;
}

void write_tuning_history_csv(const TuningResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write tuning history " + path);
  out.precision(17);
  out << "iteration,best_cost,best_P1,best_P2,best_P3\n";
  for (const auto& h : result.history) {
    out << h.iteration << ',' << h.best_cost << ',' << h.best.P1 << ',' << h.best.P2 << ',' << h.best.P3 << '\n';
  }
}

}  // namespace softwrist
