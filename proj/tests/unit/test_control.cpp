#include "softwrist/control.hpp"
#include "softwrist/errors.hpp"

#include "../support.hpp"

#include "doctest.h"

using namespace softwrist;
using testsupport::Gen;

namespace {

Eigen::VectorXd v1(double x) { return Eigen::VectorXd::Constant(1, x); }

// One RK4 step of the plant with the command held; returns sigma after it.
double sigma_after(const WristModel& w, const SmcConfig& cfg, Eigen::VectorXd q, Eigen::VectorXd qd,
                   const Eigen::VectorXd& des, const Eigen::VectorXd& tau, double h) {
  const int n = static_cast<int>(q.size());
  auto f = [&](const Eigen::VectorXd& s) {
    const Eigen::VectorXd a = s.head(n), b = s.tail(n);
    Eigen::VectorXd out(2 * n);
    out << b, forward_dynamics(coordinate_terms(a, b, w), a, b, tau, Eigen::Vector2d::Zero());
    return out;
  };
  Eigen::VectorXd x(2 * n);
  x << q, qd;
  const Eigen::VectorXd k1 = f(x), k2 = f(x + 0.5 * h * k1), k3 = f(x + 0.5 * h * k2), k4 = f(x + h * k3);
  x += h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  q = x.head(n);
  qd = x.tail(n);
  return sliding_surface(tracking_error(q, des), qd, cfg.gains, cfg.layout)[0];
}

}  // namespace

TEST_CASE("tracking error is output minus desired") {
  CHECK(tracking_error(v1(0.5236), v1(0.5236))[0] == 0.0);
  CHECK(tracking_error(v1(0.5), v1(0.5236))[0] == doctest::Approx(-0.0236).epsilon(1e-12));
  CHECK_THROWS_AS(tracking_error(Eigen::VectorXd::Zero(2), v1(0.0)), InvalidParameter);
}

TEST_CASE("sliding surface as written and its linearity") {
  const SmcGains g{0.001, 1000.0, 1000.0};
  CHECK(sliding_surface(v1(0.0), v1(0.0), g)[0] == 0.0);
  CHECK(sliding_surface(v1(0.01), v1(0.002), g)[0] == doctest::Approx(2.00001).epsilon(1e-14));
  CHECK(sliding_surface(v1(0.01), v1(0.002), g, GainLayout::kRateFirst)[0] ==
        doctest::Approx(10.000002).epsilon(1e-14));
  Gen r(1);
  for (int k = 0; k < 50; ++k) {
    const double e = r.uniform(-1, 1), d = r.uniform(-1, 1);
    for (auto layout : {GainLayout::kErrorFirst, GainLayout::kRateFirst}) {
      CHECK(sliding_surface(v1(2 * e), v1(2 * d), g, layout)[0] ==
            doctest::Approx(2 * sliding_surface(v1(e), v1(d), g, layout)[0]).epsilon(1e-14));
    }
  }
}

TEST_CASE("SMC at rest on the surface with no gravity commands nothing") {
  WristModel w;
  w.gravity.setZero();
  const DynamicsTerms t = coordinate_terms(v1(0.0), v1(0.0), w);
  for (auto layout : {GainLayout::kRateFirst, GainLayout::kErrorFirst}) {
    SmcConfig cfg;
    cfg.layout = layout;
    const ControlCommand c = smc_control(v1(0.0), v1(0.0), v1(0.0), t, Eigen::Vector2d::Zero(), cfg);
    CHECK(c.sigma[0] == 0.0);
    CHECK(c.tau[0] == 0.0);
  }
}

TEST_CASE("matrix and per-channel equivalent control agree in the single-plane case") {
  const WristModel w;
  Gen g(2);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd q = g.angles(1), qd = g.uniform(1, -2, 2), des = g.angles(1);
    const DynamicsTerms t = coordinate_terms(q, qd, w);
    SmcConfig a, b;
    b.solve = EquivalentSolve::kPerChannel;
    const Eigen::Vector2d f = g.uniform(2, -1, 1);
    const ControlCommand ca = smc_control(q, qd, des, t, f, a), cb = smc_control(q, qd, des, t, f, b);
    CHECK(std::abs(ca.tau[0] - cb.tau[0]) <= 1e-10 * std::max(1.0, std::abs(ca.tau[0])));
  }
}

TEST_CASE("switching component is bounded by P3 through L_g") {
  const WristModel w;
  Gen g(3);
  for (auto sw : {SwitchingFunction::kTanh, SwitchingFunction::kSign}) {
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd q = g.angles(1), qd = g.uniform(1, -5, 5), des = g.angles(1);
      const DynamicsTerms t = coordinate_terms(q, qd, w);
      SmcConfig cfg;
      cfg.switching = sw;
      cfg.gains.P3 = g.uniform(0.0, 2000.0);
      const ControlCommand c = smc_control(q, qd, des, t, Eigen::Vector2d::Zero(), cfg);
      const double lg = surface_weights(cfg.gains, cfg.layout).rate / t.M(0, 0);
      CHECK(std::abs(c.u_sw[0] * lg) <= cfg.gains.P3 * (1 + 1e-12));
      // After the leading minus, the switching torque opposes sigma.
      if (c.sigma[0] != 0.0) CHECK(-c.u_sw[0] * c.sigma[0] <= 0.0);
    }
  }
}

TEST_CASE("reaching condition: sigma decreases in one small closed-loop step") {
  const WristModel w;
  const SmcConfig cfg;
  Gen g(4);
  const double h = 1e-9;
  int checked = 0;
  double delta = 0.0;  // largest |sigma| seen without sigma * sigma_dot < 0
  for (int k = 0; k < 300; ++k) {
    const Eigen::VectorXd q = g.angles(1), qd = g.uniform(1, -1, 1), des = g.angles(1);
    const DynamicsTerms t = coordinate_terms(q, qd, w);
    const ControlCommand c = smc_control(q, qd, des, t, Eigen::Vector2d::Zero(), cfg);
    const double s0 = c.sigma[0];
    const double sdot = (sigma_after(w, cfg, q, qd, des, c.tau, h) - s0) / h;
    if (s0 > 0.0) {
      CHECK(sdot < 0.0);
      ++checked;
    }
    if (!(s0 * sdot < 0.0)) delta = std::max(delta, std::abs(s0));
  }
  CHECK(checked > 50);
  CHECK(delta < 0.01);
}

TEST_CASE("vanishing rate weight is a control singularity") {
  const WristModel w;
  const DynamicsTerms t = coordinate_terms(v1(0.1), v1(0.0), w);
  SmcConfig cfg;
  cfg.gains = {0.0, 1000.0, 1000.0};
  CHECK_THROWS_AS(smc_control(v1(0.1), v1(0.0), v1(0.2), t, Eigen::Vector2d::Zero(), cfg), ControlSingularity);
  cfg.solve = EquivalentSolve::kPerChannel;
  CHECK_THROWS_AS(smc_control(v1(0.1), v1(0.0), v1(0.2), t, Eigen::Vector2d::Zero(), cfg), ControlSingularity);
  cfg.gains = {1e-3, std::numeric_limits<double>::infinity(), 1.0};
  CHECK_THROWS_AS(smc_control(v1(0.1), v1(0.0), v1(0.2), t, Eigen::Vector2d::Zero(), cfg), InvalidParameter);
}

TEST_CASE("multi-coordinate SMC drives every channel's sigma down") {
  WristModel w;
  w.coordinates = CoordinateMode::kIndependent;
  Gen g(5);
  SmcConfig cfg;
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd q = g.angles(4) * 0.5, qd = g.uniform(4, -1, 1), des = g.angles(4) * 0.5;
    const DynamicsTerms t = coordinate_terms(q, qd, w);
    const ControlCommand c = smc_control(q, qd, des, t, Eigen::Vector2d::Zero(), cfg);
    // Closed-loop sigma_dot = -P3 tanh(sigma) up to the plant/model Coriolis gap.
    const SurfaceWeights sw = surface_weights(cfg.gains, cfg.layout);
    const Eigen::VectorXd acc = forward_dynamics(t, q, qd, c.tau, Eigen::Vector2d::Zero(), CoriolisModel::kPrinted);
    const Eigen::VectorXd sdot = sw.error * qd + sw.rate * acc;
    for (int i = 0; i < 4; ++i) {
      CHECK(sdot[i] == doctest::Approx(-cfg.gains.P3 * std::tanh(c.sigma[i])).epsilon(1e-6).scale(1.0));
    }
  }
}

TEST_CASE("PID correction arithmetic") {
  const PidGains g;
  CHECK(pid_correction(v1(1e-4), v1(0.0), v1(0.0), g)[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(pid_control(v1(0.3), v1(0.0), v1(0.0), v1(0.0), g)[0] == 0.3);
  const PidGains g2{2 * g.Kp, 2 * g.Ki, 2 * g.Kd};
  CHECK(pid_correction(v1(0.1), v1(0.2), v1(0.3), g2)[0] ==
        doctest::Approx(2 * pid_correction(v1(0.1), v1(0.2), v1(0.3), g)[0]).epsilon(1e-14));

  WristModel w;
  const DynamicsTerms t = coordinate_terms(v1(0.2), v1(0.0), w);
  CHECK(pid_torque(v1(0.2), t)[0] == doctest::Approx(t.K(0, 0) * 0.2 + t.G[0]).epsilon(1e-15));
}

TEST_CASE("PID integrator is trapezoidal and resets to zero") {
  PidIntegrator it(1);
  const double dt = 0.01;
  for (int k = 0; k <= 100; ++k) it.update(v1(2.0 * k * dt), dt);  // e = 2t on [0, 1]
  CHECK(it.value()[0] == doctest::Approx(1.0).epsilon(1e-12));
  it.reset();
  CHECK(it.value()[0] == 0.0);
  it.update(v1(5.0), dt);
  CHECK(it.value()[0] == 0.0);
  CHECK_THROWS_AS(it.update(Eigen::VectorXd::Zero(2), dt), InvalidParameter);
}
