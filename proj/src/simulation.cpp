#include "softwrist/simulation.hpp"

#include "softwrist/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace softwrist {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::string num(double v) {
  char buf[32];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

struct Command {
  Eigen::VectorXd tau;
  Eigen::VectorXd sigma;
};

// Everything the right-hand side needs, fixed for one episode.
class ClosedLoop {
 public:
  ClosedLoop(const Scenario& s, Eigen::VectorXd target)
      : s_(s), target_(std::move(target)), dof_(s.wrist.dofs()),
        pid_state_(s.controller == ControllerKind::kPid && s.control_period == 0.0) {}

  int dof() const { return dof_; }
  int state_size() const { return pid_state_ ? 3 * dof_ : 2 * dof_; }
  bool continuous() const { return s_.control_period == 0.0; }

  Eigen::VectorXd initial_state() const { return Eigen::VectorXd::Zero(state_size()); }

  // Control law at (t, x); `integral` is the PID error integral to use.
  Command control(double t, const Eigen::VectorXd& x, const DynamicsTerms& terms,
                  const Eigen::VectorXd& integral) const {
    const Eigen::VectorXd q = x.head(dof_);
    const Eigen::VectorXd qd = x.segment(dof_, dof_);
    const Reference ref = reference_at(s_, target_, t);
    Command c;
    if (s_.controller == ControllerKind::kSmc) {
      ControlCommand cmd = smc_control(q, qd, ref.theta, terms, s_.force_estimate, s_.smc);
      c.tau = std::move(cmd.tau);
      c.sigma = std::move(cmd.sigma);
    } else {
      const Eigen::VectorXd e = tracking_error(q, ref.theta);
      const Eigen::VectorXd e_dot = qd - ref.theta_dot;
      const Eigen::VectorXd cmd = pid_control(ref.theta, e, integral, e_dot, s_.pid);
      c.tau = pid_torque(cmd, terms);
      c.sigma = pid_correction(e, integral, e_dot, s_.pid);
    }
    return c;
  }

  Eigen::VectorXd integral_from_state(const Eigen::VectorXd& x) const {
    return pid_state_ ? Eigen::VectorXd(x.tail(dof_)) : Eigen::VectorXd::Zero(dof_);
  }

  // Continuous closed loop, or the plant under a held torque when `held` is set.
  Eigen::VectorXd rhs(double t, const Eigen::VectorXd& x, const Eigen::VectorXd* held) const {
    if (!x.allFinite()) throw IntegrationFailure("integrator stage state became non-finite");
    const Eigen::VectorXd q = x.head(dof_);
    const Eigen::VectorXd qd = x.segment(dof_, dof_);
    const DynamicsTerms terms = coordinate_terms(q, qd, s_.wrist);
    const Eigen::VectorXd tau = held ? *held : control(t, x, terms, integral_from_state(x)).tau;
    const Eigen::Vector2d f = applied_disturbance(s_.disturbances, t);
    Eigen::VectorXd dx(x.size());
    dx.head(dof_) = qd;
    dx.segment(dof_, dof_) = forward_dynamics(terms, q, qd, tau, f, CoriolisModel::kConsistent);
    if (pid_state_) dx.tail(dof_) = q - reference_at(s_, target_, t).theta;
    return dx;
  }

 private:
  const Scenario& s_;
  Eigen::VectorXd target_;
  int dof_;
  bool pid_state_;
};

void record(SimulationTrace& tr, const Scenario& s, double t, const Eigen::VectorXd& x, int dof,
            const Reference& ref, const Command& cmd) {
  const Eigen::VectorXd q = x.head(dof);
  tr.t.push_back(t);
  tr.theta_des.push_back(ref.theta.sum());
  tr.theta_o.push_back(q.sum());
  tr.theta_dot_o.push_back(x.segment(dof, dof).sum());
  tr.e.push_back((q - ref.theta).sum());
  tr.sigma.push_back(cmd.sigma.sum());
  tr.tau.push_back(cmd.tau.sum());
  const TendonForces f = tendon_forces(cmd.tau, q, s.wrist);
  if (f.has_negative) ++tr.negative_tension_rows;
  tr.tendon_forces.push_back(f.forces);
  tr.disturbance.push_back(applied_disturbance(s.disturbances, t));
}

}  // namespace

std::string to_string(ControllerKind c) { return c == ControllerKind::kSmc ? "smc" : "pid"; }

std::string to_string(Direction d) {
  switch (d) {
    case Direction::kUlnar: return "ulnar";
    case Direction::kRadial: return "radial";
    case Direction::kFlexion: return "flexion";
    case Direction::kExtension: return "extension";
  }
  return "ulnar";
}

std::string to_string(ReferenceShape r) { return r == ReferenceShape::kStep ? "step" : "quintic"; }
std::string to_string(IntegratorKind k) { return k == IntegratorKind::kRk4 ? "rk4" : "radau"; }

ControllerKind controller_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "smc") return ControllerKind::kSmc;
  if (v == "pid") return ControllerKind::kPid;
  throw ConfigError("unknown controller '" + s + "' (smc, pid)");
}

Direction direction_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "ulnar") return Direction::kUlnar;
  if (v == "radial") return Direction::kRadial;
  if (v == "flexion") return Direction::kFlexion;
  if (v == "extension") return Direction::kExtension;
  throw ConfigError("unknown direction '" + s + "' (ulnar, radial, flexion, extension)");
}

ReferenceShape reference_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "step") return ReferenceShape::kStep;
  if (v == "quintic") return ReferenceShape::kQuintic;
  throw ConfigError("unknown reference shape '" + s + "' (step, quintic)");
}

IntegratorKind integrator_from_string(const std::string& s) {
  const std::string v = lower(s);
  if (v == "rk4") return IntegratorKind::kRk4;
  if (v == "radau") return IntegratorKind::kRadau;
  throw ConfigError("unknown integrator '" + s + "' (radau, rk4)");
}

double direction_sign(Direction d) {
  return d == Direction::kUlnar || d == Direction::kFlexion ? 1.0 : -1.0;
}

std::string direction_plane(Direction d) {
  return d == Direction::kUlnar || d == Direction::kRadial ? "radial-ulnar" : "flexion-extension";
}

void Scenario::validate() const {
  wrist.validate();
  if (!(step > 0.0) || !(duration >= step) || !std::isfinite(duration)) {
    throw InvalidParameter("scenario needs 0 < step <= duration");
  }
  const double n = duration / step;
  if (std::abs(n - std::round(n)) > 1e-6) throw InvalidParameter("duration must be a whole number of steps");
  if (!std::isfinite(target) || std::abs(target) > kThetaMax + 1e-12) {
    throw InvalidParameter("target bending angle must lie within +/-50 deg");
  }
  if (control_period < 0.0) throw InvalidParameter("control period must be >= 0");
  if (control_period > 0.0) {
    const double k = control_period / step;
    if (k < 1.0 - 1e-9 || std::abs(k - std::round(k)) > 1e-6) {
      throw InvalidParameter("control period must be a whole multiple of the step");
    }
  }
  if (reference == ReferenceShape::kQuintic && !(ramp_time > 0.0)) {
    throw InvalidParameter("quintic reference needs ramp_time > 0");
  }
  for (const auto& d : disturbances) {
    if (!(d.end >= d.start) || !d.force.allFinite()) throw InvalidParameter("disturbance needs end >= start and a finite force");
  }
  if (!force_estimate.allFinite()) throw InvalidParameter("force estimate must be finite");
  if (controller == ControllerKind::kSmc) smc.gains.validate();
  else pid.validate();
  if (ik && ik->inputs() != 2) throw InvalidParameter("IK network must take (x, y)");
}

int Scenario::steps() const { return static_cast<int>(std::lround(duration / step)); }

int Scenario::substeps_per_control() const {
  return control_period > 0.0 ? static_cast<int>(std::lround(control_period / step)) : 1;
}

Disturbance opposing_pulse(const Scenario& s, double start, double end, double magnitude) {
  // Bending plane y points toward positive bending; push the tip back.
  return {start, end, Eigen::Vector2d(0.0, -direction_sign(s.direction) * std::copysign(1.0, s.target) * magnitude)};
}

Eigen::Vector2d applied_disturbance(const std::vector<Disturbance>& schedule, double t) {
  Eigen::Vector2d f = Eigen::Vector2d::Zero();
  for (const auto& d : schedule) {
    if (t >= d.start && t < d.end) f += d.force;
  }
  return f;
}

Eigen::VectorXd desired_target(const Scenario& s, std::vector<std::string>* warnings) {
  const double angle = direction_sign(s.direction) * s.target;
  const int n = s.wrist.segments();
  const bool shared = s.wrist.coordinates == CoordinateMode::kShared;
  const double L = total_length(s.wrist.geometry);
  auto spread = [&](double total) {
    Eigen::VectorXd th(n);
    for (int i = 0; i < n; ++i) th[i] = total * s.wrist.geometry[static_cast<std::size_t>(i)].length / L;
    return th;
  };
  const Eigen::VectorXd wrist_angle = Eigen::VectorXd::Constant(1, angle);
  if (!s.ik) return shared ? wrist_angle : spread(angle);
  const Eigen::Vector2d tip = sample_tip(s.wrist, wrist_angle);
  const IkPrediction p = predict(*s.ik, tip.x(), tip.y());
  if (p.out_of_workspace && warnings) warnings->push_back(p.warning);
  if (p.theta.size() == 1) return shared ? p.theta : spread(p.theta[0]);
  if (p.theta.size() != n) throw InvalidParameter("IK network outputs do not match the wrist");
  if (shared) return Eigen::VectorXd::Constant(1, p.theta.sum());
  return p.theta;
}

Reference reference_at(const Scenario& s, const Eigen::VectorXd& final_target, double t) {
  Reference r;
  if (s.reference == ReferenceShape::kStep) {
    r.theta = final_target;
    r.theta_dot = Eigen::VectorXd::Zero(final_target.size());
    return r;
  }
  const double tau = std::clamp(t / s.ramp_time, 0.0, 1.0);
  const double tau2 = tau * tau;
  const double shape = tau2 * tau * (10.0 - 15.0 * tau + 6.0 * tau2);
  const double rate = t < s.ramp_time && t > 0.0 ? 30.0 * tau2 * (1.0 - tau) * (1.0 - tau) / s.ramp_time : 0.0;
  r.theta = shape * final_target;
  r.theta_dot = rate * final_target;
  return r;
}

std::string scenario_fingerprint(const Scenario& s) {
  std::ostringstream os;
  os << "wrist:";
  for (const auto& g : s.wrist.geometry) os << num(g.length) << ',';
  os << "m=" << num(s.wrist.chord_mass) << ";k=" << num(s.wrist.stiffness) << ";d=" << num(s.wrist.damping)
     << ";db=" << num(s.wrist.augmented_damping) << ";g=" << num(s.wrist.gravity.x()) << ','
     << num(s.wrist.gravity.y()) << ";r=" << num(s.wrist.tendon_radius) << ";routing=";
  const Eigen::MatrixXd R = s.wrist.moment_arms();
  for (Eigen::Index i = 0; i < R.size(); ++i) os << num(R.data()[i]) << ',';
  os << ";coords=" << (s.wrist.coordinates == CoordinateMode::kShared ? "shared" : "independent");
  os << "|ctrl=" << to_string(s.controller) << ";smc=" << num(s.smc.gains.P1) << ',' << num(s.smc.gains.P2) << ','
     << num(s.smc.gains.P3) << ";layout=" << static_cast<int>(s.smc.layout)
     << ";switch=" << static_cast<int>(s.smc.switching) << ";solve=" << static_cast<int>(s.smc.solve)
     << ";cmodel=" << static_cast<int>(s.smc.coriolis) << ";pid=" << num(s.pid.Kp) << ',' << num(s.pid.Ki) << ','
     << num(s.pid.Kd);
  os << "|dir=" << to_string(s.direction) << ";target=" << num(s.target) << ";T=" << num(s.duration)
     << ";h=" << num(s.step) << ";cp=" << num(s.control_period) << ";int=" << to_string(s.integrator)
     << ";ref=" << to_string(s.reference) << ";ramp=" << num(s.ramp_time) << ";dist=";
  for (const auto& d : s.disturbances) {
    os << num(d.start) << ',' << num(d.end) << ',' << num(d.force.x()) << ',' << num(d.force.y()) << ';';
  }
  os << "fest=" << num(s.force_estimate.x()) << ',' << num(s.force_estimate.y());
  os << ";ik=";
  if (s.ik) {
    const Eigen::VectorXd p = s.ik->parameters();
    std::uint64_t h = 0;
    for (Eigen::Index i = 0; i < p.size(); ++i) h = h * 31 + fnv1a(num(p[i]));
    os << h;
  } else {
    os << "none";
  }
  os << ";seed=" << s.seed;
  return os.str();
}

SimulationTrace run_episode(const Scenario& scenario) {
  scenario.validate();
  SimulationTrace tr;
  tr.actuators = scenario.wrist.actuators();
  tr.seed = scenario.seed;
  tr.controller = to_string(scenario.controller);
  {
    std::ostringstream g;
    if (scenario.controller == ControllerKind::kSmc) {
      g << "P1=" << num(scenario.smc.gains.P1) << " P2=" << num(scenario.smc.gains.P2)
        << " P3=" << num(scenario.smc.gains.P3);
    } else {
      g << "Kp=" << num(scenario.pid.Kp) << " Ki=" << num(scenario.pid.Ki) << " Kd=" << num(scenario.pid.Kd);
    }
    tr.gains = g.str();
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(fnv1a(scenario_fingerprint(scenario))));
  tr.scenario_hash = hex;

  const Eigen::VectorXd target = desired_target(scenario, &tr.warnings);
  ClosedLoop loop(scenario, target);
  const int dof = loop.dof();
  const int steps = scenario.steps();
  const double h = scenario.step;
  const int sub = scenario.substeps_per_control();
  const std::size_t reserve = static_cast<std::size_t>(steps) + 1;
  tr.t.reserve(reserve);
  tr.theta_des.reserve(reserve);
  tr.theta_o.reserve(reserve);
  tr.theta_dot_o.reserve(reserve);
  tr.e.reserve(reserve);
  tr.sigma.reserve(reserve);
  tr.tau.reserve(reserve);
  tr.tendon_forces.reserve(reserve);
  tr.disturbance.reserve(reserve);

  Eigen::VectorXd x = loop.initial_state();
  RadauIIA radau;
  PidIntegrator integrator(dof);
  Command held;
  bool range_warned = false;

  try {
    for (int k = 0; k <= steps; ++k) {
      const double t = static_cast<double>(k) * h;
      const Eigen::VectorXd q = x.head(dof);
      const Eigen::VectorXd qd = x.segment(dof, dof);
      const DynamicsTerms terms = coordinate_terms(q, qd, scenario.wrist);
      Command cmd;
      if (loop.continuous()) {
        cmd = loop.control(t, x, terms, loop.integral_from_state(x));
      } else {
        if (k % sub == 0) {
          const Reference ref = reference_at(scenario, target, t);
          const Eigen::VectorXd& integral = integrator.update(q - ref.theta, scenario.control_period);
          held = loop.control(t, x, terms, integral);
        }
        cmd = held;
      }
      if (!cmd.tau.allFinite()) throw IntegrationFailure("control torque became non-finite");
      record(tr, scenario, t, x, dof, reference_at(scenario, target, t), cmd);
      if (!range_warned) {
        const auto w = range_warnings(segment_state(q, qd, scenario.wrist).theta);
        if (!w.empty()) {
          tr.warnings.push_back("t=" + num(t) + ": " + w.front());
          range_warned = true;
        }
      }
      if (k == steps) break;

      const Eigen::VectorXd* held_tau = loop.continuous() ? nullptr : &held.tau;
      const OdeRhs f = [&](double tt, const Eigen::VectorXd& xx) { return loop.rhs(tt, xx, held_tau); };
      Eigen::VectorXd next = scenario.integrator == IntegratorKind::kRk4 ? rk4_step(f, t, x, h) : radau.step(f, t, x, h);
      if (!next.allFinite()) {
        std::ostringstream os;
        os << "state became non-finite after t=" << t;
        throw IntegrationFailure(os.str());
      }
      x = std::move(next);
    }
    if (scenario.integrator == IntegratorKind::kRk4) tr.rhs_evaluations = 4L * steps;
  } catch (const Error& e) {
    // The scenario was validated up front, so anything thrown here is numerical.
    tr.failed = true;
    tr.failure = e.what();
  }
  if (scenario.integrator == IntegratorKind::kRadau) {
    tr.rhs_evaluations = radau.stats().rhs_evaluations;
    tr.jacobian_updates = radau.stats().jacobian_updates;
  }
  return tr;
}

Metrics compute_metrics(const SimulationTrace& trace, double target) {
  Metrics m;
  m.failed = trace.failed;
  const std::size_t n = trace.e.size();
  if (n == 0) {
    m.rmse = std::numeric_limits<double>::infinity();
    m.steady_state_error = std::numeric_limits<double>::infinity();
    return m;
  }
  double ss = 0.0;
  for (double e : trace.e) ss += e * e;
  m.rmse = std::sqrt(ss / static_cast<double>(n));

  const double band = kSettlingBand * std::abs(target);
  std::size_t last_out = n;  // n: never outside
  for (std::size_t i = n; i-- > 0;) {
    if (std::abs(trace.e[i]) > band) {
      last_out = i;
      break;
    }
  }
  if (trace.failed) {
    m.settling_time.reset();
  } else if (last_out == n) {
    m.settling_time = trace.t.front();
  } else if (last_out + 1 < n) {
    m.settling_time = trace.t[last_out + 1];
  }

  const std::size_t window = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(kSteadyStateWindow * static_cast<double>(n))));
  double sum = 0.0;
  for (std::size_t i = n - window; i < n; ++i) sum += std::abs(trace.e[i]);
  m.steady_state_error = sum / static_cast<double>(window);
  return m;
}

namespace {

ComparisonRow row(const std::string& name, double l, double r) {
  ComparisonRow c{name, l, r, "tie"};
  if (l < r) c.verdict = "left";
  else if (r < l) c.verdict = "right";
  return c;
}

std::string label(const Scenario& s) { return to_string(s.controller); }

}  // namespace

ComparisonReport compare_controllers(const Scenario& left, const Scenario& right) {
  ComparisonReport rep;
  rep.left_label = label(left);
  rep.right_label = label(right);
  rep.left_trace = run_episode(left);
  rep.right_trace = run_episode(right);
  rep.left = compute_metrics(rep.left_trace, left.target);
  rep.right = compute_metrics(rep.right_trace, right.target);
  const double inf = std::numeric_limits<double>::infinity();
  rep.rows.push_back(row("rmse", rep.left.rmse, rep.right.rmse));
  rep.rows.push_back(row("settling_time", rep.left.settling_time.value_or(inf), rep.right.settling_time.value_or(inf)));
  rep.rows.push_back(row("steady_state_error", rep.left.steady_state_error, rep.right.steady_state_error));
  return rep;
}

ComparisonReport compare_smc_pid(const Scenario& s) {
  Scenario smc = s, pid = s;
  smc.controller = ControllerKind::kSmc;
  pid.controller = ControllerKind::kPid;
  return compare_controllers(smc, pid);
}

}  // namespace softwrist
