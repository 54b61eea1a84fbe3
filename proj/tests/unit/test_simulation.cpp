#include "softwrist/errors.hpp"
#include "softwrist/simulation.hpp"

#include "../support.hpp"

#include "doctest.h"

using namespace softwrist;

namespace {

// Soft surface gains: the loop is non-stiff and RK4 converges cleanly.
Scenario smooth(double h) {
  Scenario s;
  s.integrator = IntegratorKind::kRk4;
  s.reference = ReferenceShape::kQuintic;
  s.duration = 1.0;
  s.step = h;
  s.smc.gains = {1.0, 5.0, 2.0};
  s.smc.coriolis = CoriolisModel::kConsistent;
  return s;
}

SimulationTrace synthetic(const std::vector<double>& e, double dt = 0.1) {
  SimulationTrace tr;
  for (std::size_t i = 0; i < e.size(); ++i) {
    tr.t.push_back(static_cast<double>(i) * dt);
    tr.e.push_back(e[i]);
  }
  return tr;
}

}  // namespace

TEST_CASE("zero target from rest stays exactly at rest") {
  for (auto c : {ControllerKind::kSmc, ControllerKind::kPid}) {
    Scenario s;
    s.controller = c;
    s.target = 0.0;
    s.duration = 0.05;
    const SimulationTrace tr = run_episode(s);
    REQUIRE_FALSE(tr.failed);
    CHECK(tr.rows() == 501);
    for (double th : tr.theta_o) CHECK(th == 0.0);
  }
}

TEST_CASE("trace shape and columns") {
  Scenario s;
  s.duration = 0.02;
  const SimulationTrace tr = run_episode(s);
  CHECK(tr.rows() == 201);
  CHECK(tr.t.back() == doctest::Approx(0.02).epsilon(1e-12));
  CHECK(tr.tendon_forces.size() == tr.rows());
  CHECK(tr.tendon_forces[0].size() == 2);
  CHECK(tr.actuators == 2);
  CHECK(tr.theta_des[0] == doctest::Approx(30.0 * testsupport::kDeg).epsilon(1e-15));
  for (std::size_t i = 0; i < tr.rows(); ++i) CHECK(tr.e[i] == tr.theta_o[i] - tr.theta_des[i]);
  CHECK(tr.scenario_hash.size() == 16);
  CHECK(tr.gains == "P1=0.001 P2=1000 P3=1000");
}

TEST_CASE("episodes are bit-identical under the same scenario") {
  for (auto c : {ControllerKind::kSmc, ControllerKind::kPid}) {
    Scenario s;
    s.controller = c;
    s.duration = 0.1;
    s.disturbances.push_back(opposing_pulse(s, 0.03, 0.06, 1.0));
    const SimulationTrace a = run_episode(s), b = run_episode(s);
    CHECK(a.theta_o == b.theta_o);
    CHECK(a.tau == b.tau);
    CHECK(a.scenario_hash == b.scenario_hash);
  }
}

TEST_CASE("RK4 self-convergence on a smooth episode") {
  const double a = run_episode(smooth(1e-2)).theta_o.back();
  const double b = run_episode(smooth(5e-3)).theta_o.back();
  const double c = run_episode(smooth(2.5e-3)).theta_o.back();
  CHECK(std::abs(b - a) < 1e-8);
  CHECK(std::abs(c - b) < 1e-8);
  CHECK(std::log2(std::abs(b - a) / std::abs(c - b)) >= 3.8);
}

TEST_CASE("zero-order hold keeps the command fixed between control ticks") {
  Scenario s = smooth(2e-4);
  s.control_period = 5e-3;
  s.duration = 0.2;
  const SimulationTrace tr = run_episode(s);
  REQUIRE_MESSAGE(!tr.failed, tr.failure);
  for (std::size_t i = 0; i + 1 < tr.rows(); ++i) {
    if ((i + 1) % 25 != 0) CHECK(tr.tau[i + 1] == tr.tau[i]);
  }
  CHECK(tr.tau[25] != tr.tau[24]);
}

TEST_CASE("disturbance schedule integrates to its analytic impulse") {
  Scenario s;
  s.duration = 0.1;
  s.step = 1e-4;
  s.disturbances.push_back({0.02, 0.07, Eigen::Vector2d(0.3, -1.0)});
  s.disturbances.push_back({0.05, 0.06, Eigen::Vector2d(0.0, 0.5)});
  const SimulationTrace tr = run_episode(s);
  double ix = 0.0, iy = 0.0;
  for (std::size_t i = 0; i + 1 < tr.rows(); ++i) {
    const double dt = tr.t[i + 1] - tr.t[i];
    ix += 0.5 * dt * (tr.disturbance[i].x() + tr.disturbance[i + 1].x());
    iy += 0.5 * dt * (tr.disturbance[i].y() + tr.disturbance[i + 1].y());
  }
  CHECK(std::abs(ix - 0.3 * 0.05) <= 1e-4 * 0.3 * 2);
  CHECK(std::abs(iy - (-1.0 * 0.05 + 0.5 * 0.01)) <= 1e-4 * 1.5 * 2);
}

TEST_CASE("opposing pulse pushes back toward neutral") {
  Scenario s;
  for (auto d : {Direction::kUlnar, Direction::kRadial, Direction::kFlexion, Direction::kExtension}) {
    s.direction = d;
    const Disturbance p = opposing_pulse(s, 1.0, 1.5, 1.0);
    CHECK(p.force.y() == -direction_sign(d));
    CHECK(applied_disturbance({p}, 1.5).norm() == 0.0);
    CHECK(applied_disturbance({p}, 1.0).norm() == 1.0);
  }
  CHECK(direction_plane(Direction::kFlexion) == "flexion-extension");
}

TEST_CASE("a blown-up episode is truncated and flagged") {
  Scenario s;
  s.integrator = IntegratorKind::kRk4;
  s.step = 1e-3;
  s.duration = 0.5;
  const SimulationTrace tr = run_episode(s);
  CHECK(tr.failed);
  CHECK_FALSE(tr.failure.empty());
  CHECK(tr.rows() < 501);
  for (double th : tr.theta_o) CHECK(std::isfinite(th));
  CHECK(compute_metrics(tr, s.target).failed);
}

TEST_CASE("scenario validation") {
  Scenario s;
  s.step = 0.0;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s = Scenario{};
  s.target = 60.0 * testsupport::kDeg;
  CHECK_THROWS_AS(run_episode(s), InvalidParameter);
  s = Scenario{};
  s.duration = 1e-5;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  s = Scenario{};
  s.control_period = 1.5e-4;
  CHECK_THROWS_AS(s.validate(), InvalidParameter);
  CHECK_THROWS_AS(controller_from_string("lqr"), ConfigError);
}

TEST_CASE("metrics on synthetic traces") {
  const Metrics z = compute_metrics(synthetic(std::vector<double>(50, 0.0)), 0.5);
  CHECK(z.rmse == 0.0);
  REQUIRE(z.settling_time);
  CHECK(*z.settling_time == 0.0);
  CHECK(z.steady_state_error == 0.0);

  const Metrics c = compute_metrics(synthetic(std::vector<double>(50, -0.3)), 0.5);
  CHECK(c.rmse == doctest::Approx(0.3).epsilon(1e-15));
  CHECK(c.steady_state_error == doctest::Approx(0.3).epsilon(1e-15));
  CHECK_FALSE(c.settling_time);

  // Leaves the 2% band (0.01) for the last time at row 5.
  std::vector<double> e = {0.5, 0.2, 0.005, 0.02, 0.0, -0.011, 0.009, 0.0, 0.0, 0.0};
  const Metrics m = compute_metrics(synthetic(e), 0.5);
  REQUIRE(m.settling_time);
  CHECK(*m.settling_time == doctest::Approx(0.6));
  CHECK(m.steady_state_error == 0.0);  // final row only
  e.back() = 0.004;
  CHECK(compute_metrics(synthetic(e), 0.5).steady_state_error == doctest::Approx(0.004));
}

TEST_CASE("comparison report: identical sides tie, swapping swaps columns") {
  Scenario s;
  s.duration = 0.05;
  const ComparisonReport same = compare_controllers(s, s);
  CHECK(same.left.rmse == same.right.rmse);
  for (const auto& r : same.rows) CHECK(r.verdict == "tie");

  Scenario p = s;
  p.controller = ControllerKind::kPid;
  const ComparisonReport ab = compare_controllers(s, p), ba = compare_controllers(p, s);
  REQUIRE(ab.rows.size() == ba.rows.size());
  for (std::size_t i = 0; i < ab.rows.size(); ++i) {
    CHECK(ab.rows[i].left == ba.rows[i].right);
    CHECK(ab.rows[i].right == ba.rows[i].left);
    if (ab.rows[i].verdict == "left") CHECK(ba.rows[i].verdict == "right");
  }
  CHECK(ab.left_label == "smc");
  CHECK(ba.left_label == "pid");
}

TEST_CASE("fingerprint tracks every scenario field that matters") {
  Scenario a;
  Scenario b = a;
  CHECK(scenario_fingerprint(a) == scenario_fingerprint(b));
  b.seed = 2;
  CHECK(scenario_fingerprint(a) != scenario_fingerprint(b));
  b = a;
  b.smc.gains.P3 = 999.0;
  CHECK(scenario_fingerprint(a) != scenario_fingerprint(b));
  b = a;
  b.disturbances.push_back(opposing_pulse(b, 1, 2, 1));
  CHECK(scenario_fingerprint(a) != scenario_fingerprint(b));
}

TEST_CASE("independent coordinates need a tendon per coordinate") {
  Scenario s;
  s.wrist.coordinates = CoordinateMode::kIndependent;
  s.duration = 0.05;
  const Eigen::VectorXd t = desired_target(s);
  CHECK(t.size() == 4);
  CHECK(t.sum() == doctest::Approx(s.target).epsilon(1e-14));

  // One antagonistic pair cannot realize four independent torques.
  const SimulationTrace under = run_episode(s);
  CHECK(under.failed);
  CHECK(under.failure.find("does not span") != std::string::npos);

  // Staggered routing: tendon k terminates on segment k.
  Eigen::MatrixXd routing = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int k = i; k < 4; ++k) routing(i, k) = s.wrist.tendon_radius;
  s.wrist.tendon_routing = routing;
  const SimulationTrace tr = run_episode(s);
  CHECK_MESSAGE(!tr.failed, tr.failure);
  CHECK(tr.actuators == 4);
  CHECK(tr.theta_des[0] == doctest::Approx(s.target).epsilon(1e-14));
}
