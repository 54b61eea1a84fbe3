#pragma once

// Sliding-mode controller (equivalent + smoothed switching terms) and the
// feedforward-corrected PID baseline.

#include "softwrist/dynamics.hpp"

#include <Eigen/Dense>

#include <string>

namespace softwrist {

// e = theta_o - theta_des.
Eigen::VectorXd tracking_error(const Eigen::VectorXd& theta_o, const Eigen::VectorXd& theta_des);

struct SmcGains {
  double P1 = 0.001;
  double P2 = 1000.0;
  double P3 = 1000.0;

  void validate() const;
};

// Which gain weights the position error in sigma.  kErrorFirst is the
// literal sigma = P1 e + P2 theta_dot; kRateFirst swaps the two weights
// (sigma = P2 e + P1 theta_dot), which is the layout under which the reported
// tuned triple produces the reported transient.
enum class GainLayout { kRateFirst, kErrorFirst };

struct SurfaceWeights {
  double error = 0.0;
  double rate = 0.0;
};
SurfaceWeights surface_weights(const SmcGains& gains, GainLayout layout);

Eigen::VectorXd sliding_surface(const Eigen::VectorXd& e, const Eigen::VectorXd& theta_o_dot,
                                const SmcGains& gains, GainLayout layout = GainLayout::kErrorFirst);

enum class SwitchingFunction { kTanh, kSign };
enum class EquivalentSolve { kMatrix, kPerChannel };

struct SmcConfig {
  SmcGains gains;
  GainLayout layout = GainLayout::kRateFirst;
  SwitchingFunction switching = SwitchingFunction::kTanh;
  EquivalentSolve solve = EquivalentSolve::kMatrix;
  CoriolisModel coriolis = CoriolisModel::kPrinted;
};

struct ControlCommand {
  Eigen::VectorXd tau;
  Eigen::VectorXd sigma;
  Eigen::VectorXd u_eq;
  Eigen::VectorXd u_sw;
};

inline constexpr double kControlSingularityThreshold = 1e-12;

// Computes tau = -(U_eq + U_sw) at the current state in the model's
// coordinates.  f_ext_estimate is the tip force the controller knows about.
ControlCommand smc_control(const Eigen::VectorXd& theta_o, const Eigen::VectorXd& theta_o_dot,
                           const Eigen::VectorXd& theta_des, const DynamicsTerms& terms,
                           const Eigen::Vector2d& f_ext_estimate, const SmcConfig& config);

struct PidGains {
  double Kp = 1e4;
  double Ki = 5e3;
  double Kd = 2e3;

  void validate() const;
};

// Kp e + Ki int(e) + Kd e_dot.
Eigen::VectorXd pid_correction(const Eigen::VectorXd& e, const Eigen::VectorXd& e_integral,
                               const Eigen::VectorXd& e_dot, const PidGains& gains);

// Feedforward angle corrected by the PID term.  With e = theta_o - theta_des
// the correction is subtracted, so a positive error lowers the command.
Eigen::VectorXd pid_control(const Eigen::VectorXd& theta_ff, const Eigen::VectorXd& e,
                            const Eigen::VectorXd& e_integral, const Eigen::VectorXd& e_dot,
                            const PidGains& gains);

// Torque that holds the corrected angle command against the spring and
// gravity: the position-servo plant interface of the PID loop.
Eigen::VectorXd pid_torque(const Eigen::VectorXd& theta_cmd, const DynamicsTerms& terms);

// Trapezoidal error integral for sampled operation.
class PidIntegrator {
 public:
  explicit PidIntegrator(int size = 1);
  void reset();
  const Eigen::VectorXd& update(const Eigen::VectorXd& e, double dt);
  const Eigen::VectorXd& value() const { return integral_; }

 private:
  Eigen::VectorXd integral_;
  Eigen::VectorXd last_;
  bool primed_ = false;
};

}  // namespace softwrist
