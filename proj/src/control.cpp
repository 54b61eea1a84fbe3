#include "softwrist/control.hpp"

#include "softwrist/errors.hpp"

#include <cmath>
#include <sstream>

namespace softwrist {

namespace {

void require_same_size(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const char* what) {
  if (a.size() != b.size()) {
    std::ostringstream os;
    os << what << ": length mismatch (" << a.size() << " vs " << b.size() << ")";
    throw InvalidParameter(os.str());
  }
}

double switching(double s, SwitchingFunction f) {
  if (f == SwitchingFunction::kTanh) return std::tanh(s);
  return static_cast<double>((s > 0.0) - (s < 0.0));
}

}  // namespace

Eigen::VectorXd tracking_error(const Eigen::VectorXd& theta_o, const Eigen::VectorXd& theta_des) {
  require_same_size(theta_o, theta_des, "tracking error");
  return theta_o - theta_des;
}

void SmcGains::validate() const {
  if (!std::isfinite(P1) || !std::isfinite(P2) || !std::isfinite(P3)) {
    throw InvalidParameter("SMC gains must be finite");
  }
  if (P3 < 0.0) throw InvalidParameter("SMC switching gain P3 must be >= 0");
}

SurfaceWeights surface_weights(const SmcGains& gains, GainLayout layout) {
  if (layout == GainLayout::kErrorFirst) return {gains.P1, gains.P2};
  return {gains.P2, gains.P1};
}

Eigen::VectorXd sliding_surface(const Eigen::VectorXd& e, const Eigen::VectorXd& theta_o_dot,
                                const SmcGains& gains, GainLayout layout) {
  require_same_size(e, theta_o_dot, "sliding surface");
  const SurfaceWeights w = surface_weights(gains, layout);
  return w.error * e + w.rate * theta_o_dot;
}

ControlCommand smc_control(const Eigen::VectorXd& theta_o, const Eigen::VectorXd& theta_o_dot,
                           const Eigen::VectorXd& theta_des, const DynamicsTerms& terms,
                           const Eigen::Vector2d& f_ext_estimate, const SmcConfig& config) {
  config.gains.validate();
  require_same_size(theta_o, theta_o_dot, "smc state");
  const SurfaceWeights w = surface_weights(config.gains, config.layout);
  const Eigen::Index n = theta_o.size();
  if (terms.M.rows() != n) throw InvalidParameter("dynamics terms do not match the controlled coordinates");

  ControlCommand cmd;
  const Eigen::VectorXd e = tracking_error(theta_o, theta_des);
  cmd.sigma = w.error * e + w.rate * theta_o_dot;

  const Eigen::VectorXd velocity_terms = config.coriolis == CoriolisModel::kPrinted
                                             ? Eigen::VectorXd(terms.C * theta_o_dot)
                                             : terms.coriolis;
  const Eigen::VectorXd rhs = terms.J.transpose() * f_ext_estimate - velocity_terms -
                              terms.D * theta_o_dot - terms.K * theta_o - terms.G;
  const Eigen::VectorXd drift = solve_inertia(terms.M, rhs, "controller state");
  const Eigen::VectorXd Lf = w.error * theta_o_dot + w.rate * drift;

  Eigen::VectorXd sw(n);
  for (Eigen::Index i = 0; i < n; ++i) sw[i] = config.gains.P3 * switching(cmd.sigma[i], config.switching);

  // L_g sigma = w_r M^-1; its inverse is M / w_r.
  if (std::abs(w.rate) < kControlSingularityThreshold) {
    throw ControlSingularity("L_g sigma vanishes: the rate weight of the sliding surface is zero");
  }
  if (config.solve == EquivalentSolve::kMatrix) {
    // Smallest eigenvalue of w_r M^-1 is |w_r| / lambda_max(M).
    const double m_max = n == 1 ? terms.M(0, 0)
                                : terms.M.selfadjointView<Eigen::Lower>().eigenvalues().maxCoeff();
    const double lg_min = std::abs(w.rate) / m_max;
    if (!(lg_min >= kControlSingularityThreshold)) {
      throw ControlSingularity("L_g sigma is singular at the current state");
    }
    cmd.u_eq = terms.M * Lf / w.rate;
    cmd.u_sw = terms.M * sw / w.rate;
  } else {
    const Eigen::VectorXd lg =
        n == 1 ? Eigen::VectorXd::Constant(1, w.rate / terms.M(0, 0)) : Eigen::VectorXd(w.rate * terms.M.inverse().diagonal());
    cmd.u_eq.resize(n);
    cmd.u_sw.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(std::abs(lg[i]) >= kControlSingularityThreshold)) {
        std::ostringstream os;
        os << "L_g sigma vanishes on channel " << i;
        throw ControlSingularity(os.str());
      }
      cmd.u_eq[i] = Lf[i] / lg[i];
      cmd.u_sw[i] = sw[i] / lg[i];
    }
  }
  cmd.tau = -(cmd.u_eq + cmd.u_sw);
  return cmd;
}

void PidGains::validate() const {
  if (!std::isfinite(Kp) || !std::isfinite(Ki) || !std::isfinite(Kd)) {
    throw InvalidParameter("PID gains must be finite");
  }
}

Eigen::VectorXd pid_correction(const Eigen::VectorXd& e, const Eigen::VectorXd& e_integral,
                               const Eigen::VectorXd& e_dot, const PidGains& gains) {
  require_same_size(e, e_integral, "pid integral");
  require_same_size(e, e_dot, "pid rate");
  return gains.Kp * e + gains.Ki * e_integral + gains.Kd * e_dot;
}

Eigen::VectorXd pid_control(const Eigen::VectorXd& theta_ff, const Eigen::VectorXd& e,
                            const Eigen::VectorXd& e_integral, const Eigen::VectorXd& e_dot,
                            const PidGains& gains) {
  require_same_size(theta_ff, e, "pid feedforward");
  return theta_ff - pid_correction(e, e_integral, e_dot, gains);
}

Eigen::VectorXd pid_torque(const Eigen::VectorXd& theta_cmd, const DynamicsTerms& terms) {
  return terms.K * theta_cmd + terms.G;
}

PidIntegrator::PidIntegrator(int size)
    : integral_(Eigen::VectorXd::Zero(size)), last_(Eigen::VectorXd::Zero(size)) {}

void PidIntegrator::reset() {
  integral_.setZero();
  last_.setZero();
  primed_ = false;
}

const Eigen::VectorXd& PidIntegrator::update(const Eigen::VectorXd& e, double dt) {
  if (e.size() != integral_.size()) throw InvalidParameter("pid integrator size mismatch");
  // First sample only records the left endpoint.
  if (primed_) integral_ += 0.5 * dt * (e + last_);
  last_ = e;
  primed_ = true;
  return integral_;
}

}  // namespace softwrist
