#pragma once

// Closed-loop episodes of the wrist under SMC or PID control, disturbance
// injection, traces and metrics.

#include "softwrist/control.hpp"
#include "softwrist/dynamics.hpp"
#include "softwrist/integrators.hpp"
#include "softwrist/neural_ik.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace softwrist {

enum class ControllerKind { kSmc, kPid };
enum class Direction { kUlnar, kRadial, kFlexion, kExtension };
enum class ReferenceShape { kStep, kQuintic };

std::string to_string(ControllerKind c);
std::string to_string(Direction d);
std::string to_string(ReferenceShape r);
std::string to_string(IntegratorKind k);
ControllerKind controller_from_string(const std::string& s);
Direction direction_from_string(const std::string& s);
ReferenceShape reference_from_string(const std::string& s);
IntegratorKind integrator_from_string(const std::string& s);

// Ulnar and flexion bend positively; radial and extension negatively.
double direction_sign(Direction d);
// "radial-ulnar" or "flexion-extension".
std::string direction_plane(Direction d);

struct Disturbance {
  double start = 0.0;  // s
  double end = 0.0;    // s, exclusive
  Eigen::Vector2d force = Eigen::Vector2d::Zero();  // N at the tip, bending-plane axes
};

struct Scenario {
  WristModel wrist;
  ControllerKind controller = ControllerKind::kSmc;
  SmcConfig smc;
  PidGains pid;
  Direction direction = Direction::kUlnar;
  double target = 30.0 * std::numbers::pi / 180.0;  // rad, magnitude of the commanded bend
  double duration = 5.0;                             // s
  double step = 1e-4;                                // s
  double control_period = 0.0;                       // s; 0 evaluates the law continuously
  IntegratorKind integrator = IntegratorKind::kRadau;
  ReferenceShape reference = ReferenceShape::kStep;
  double ramp_time = 0.5;  // s, quintic reference only
  std::vector<Disturbance> disturbances;
  Eigen::Vector2d force_estimate = Eigen::Vector2d::Zero();  // tip force known to the SMC
  // Desired-angle block: when set, the commanded tip position is mapped
  // back to angles by the network; otherwise the target angle is used directly.
  std::shared_ptr<const MlpNetwork> ik;
  std::uint64_t seed = 1;

  void validate() const;
  int steps() const;
  int substeps_per_control() const;
};

// A tip pulse opposing the commanded bend (pushes toward neutral).
Disturbance opposing_pulse(const Scenario& s, double start, double end, double magnitude);

Eigen::Vector2d applied_disturbance(const std::vector<Disturbance>& schedule, double t);

struct SimulationTrace {
  std::vector<double> t, theta_des, theta_o, theta_dot_o, e, sigma, tau;
  std::vector<Eigen::VectorXd> tendon_forces;
  std::vector<Eigen::Vector2d> disturbance;

  int actuators = 0;
  bool failed = false;
  std::string failure;
  long negative_tension_rows = 0;
  long rhs_evaluations = 0;
  long jacobian_updates = 0;
  std::string scenario_hash;
  std::string controller;
  std::string gains;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  std::size_t rows() const { return t.size(); }
};

// Desired angle(s) in the model's coordinates at time t, and the target
// angle the desired-angle block produced (after any IK mapping).
struct Reference {
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_dot;
};
Reference reference_at(const Scenario& s, const Eigen::VectorXd& final_target, double t);
// Final desired angle(s) in the controlled coordinates for the scenario.
Eigen::VectorXd desired_target(const Scenario& s, std::vector<std::string>* warnings = nullptr);

SimulationTrace run_episode(const Scenario& scenario);

struct Metrics {
  double rmse = 0.0;
  std::optional<double> settling_time;  // empty: unsettled
  double steady_state_error = 0.0;
  bool failed = false;
};

inline constexpr double kSettlingBand = 0.02;
inline constexpr double kSteadyStateWindow = 0.10;

Metrics compute_metrics(const SimulationTrace& trace, double target);

struct ReferenceMetrics {
  double rmse;
  double settling_time;
  double steady_state_error;
};
inline constexpr ReferenceMetrics kReferenceSmc{2.7e-4, 1.2, 2.31e-4};
inline constexpr ReferenceMetrics kReferencePid{1.5e-3, 3.0, 2.48e-3};

struct ComparisonRow {
  std::string metric;
  double left = 0.0;
  double right = 0.0;
  std::string verdict;  // "left", "right" or "tie" (lower is better)
};

struct ComparisonReport {
  std::string left_label;
  std::string right_label;
  Metrics left;
  Metrics right;
  std::vector<ComparisonRow> rows;
  SimulationTrace left_trace;
  SimulationTrace right_trace;
};

ComparisonReport compare_controllers(const Scenario& left, const Scenario& right);
// The same scenario run under SMC (left) and PID (right).
ComparisonReport compare_smc_pid(const Scenario& s);

std::string scenario_fingerprint(const Scenario& s);

}  // namespace softwrist
