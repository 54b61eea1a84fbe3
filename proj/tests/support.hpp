#pragma once

// Generators and independent oracles shared by the unit and acceptance tests.
// Nothing here calls into the library's kinematics or dynamics.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace testsupport {

inline constexpr double kDeg = std::numbers::pi / 180.0;
inline constexpr double kThetaMax = 50.0 * kDeg;

struct Gen {
  std::mt19937_64 rng;
  explicit Gen(std::uint64_t seed) : rng(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }
  Eigen::VectorXd uniform(int n, double lo, double hi) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = uniform(lo, hi);
    return v;
  }
  Eigen::VectorXd angles(int n) { return uniform(n, -kThetaMax, kThetaMax); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }
};

// Tip of one arc by composite Simpson on (cos(th s / l), sin(th s / l)).
inline Eigen::Vector2d arc_quadrature(double theta, double length, int intervals = 2000) {
  const double h = length / intervals;
  Eigen::Vector2d sum = Eigen::Vector2d::Zero();
  for (int k = 0; k <= intervals; ++k) {
    const double s = k * h;
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * Eigen::Vector2d(std::cos(theta * s / length), std::sin(theta * s / length));
  }
  return sum * h / 3.0;
}

// Planar point masses at the chord midpoints of each arc, built directly
// from chord geometry.
struct PointMassWrist {
  std::vector<double> lengths;
  double mass = 0.01;
  Eigen::Vector2d gravity{-9.81, 0.0};

  int n() const { return static_cast<int>(lengths.size()); }

  std::vector<Eigen::Vector2d> masses(const Eigen::VectorXd& theta, Eigen::Vector2d* tip = nullptr) const {
    std::vector<Eigen::Vector2d> out;
    Eigen::Vector2d o = Eigen::Vector2d::Zero();
    double phi = 0.0;
    for (int i = 0; i < n(); ++i) {
      const double th = theta[i], l = lengths[static_cast<std::size_t>(i)];
      const double chord = std::abs(th) > 1e-8 ? 2.0 * l * std::sin(th / 2) / th : l * (1.0 - th * th / 24.0);
      const Eigen::Vector2d dir(std::cos(phi + th / 2), std::sin(phi + th / 2));
      out.push_back(o + 0.5 * chord * dir);
      o += chord * dir;
      phi += th;
    }
    if (tip) *tip = o;
    return out;
  }

  Eigen::Vector2d tip(const Eigen::VectorXd& theta) const {
    Eigen::Vector2d t;
    masses(theta, &t);
    return t;
  }

  double gravity_potential(const Eigen::VectorXd& theta) const {
    double v = 0.0;
    for (const auto& p : masses(theta)) v -= mass * gravity.dot(p);
    return v;
  }

  // Central differences of the point positions, h = 1e-6.
  Eigen::MatrixXd inertia(const Eigen::VectorXd& theta, double h = 1e-6) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n(), n());
    std::vector<Eigen::MatrixXd> J(static_cast<std::size_t>(n()), Eigen::MatrixXd(2, n()));
    for (int k = 0; k < n(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const auto pp = masses(tp), pm = masses(tm);
      for (int i = 0; i < n(); ++i) {
        J[static_cast<std::size_t>(i)].col(k) = (pp[static_cast<std::size_t>(i)] - pm[static_cast<std::size_t>(i)]) / (2 * h);
      }
    }
    for (const auto& Ji : J) M += mass * Ji.transpose() * Ji;
    return M;
  }

  Eigen::VectorXd gravity_torque(const Eigen::VectorXd& theta, double h = 1e-6) const {
    Eigen::VectorXd g(n());
    for (int k = 0; k < n(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      g[k] = (gravity_potential(tp) - gravity_potential(tm)) / (2 * h);
    }
    return g;
  }

  // c = sum_i m J_i^T (d^2 p_i / dt^2 at zero acceleration), the second
  // directional difference of each point along theta_dot.
  Eigen::VectorXd coriolis(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_dot, double h = 1e-6) const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n());
    const double rate = theta_dot.cwiseAbs().maxCoeff();
    if (rate == 0.0) return c;
    const double s = 1e-4 / rate;
    const auto p0 = masses(theta), pp = masses(theta + s * theta_dot), pm = masses(theta - s * theta_dot);
    std::vector<Eigen::MatrixXd> J(p0.size(), Eigen::MatrixXd(2, n()));
    for (int k = 0; k < n(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      const auto jp = masses(tp), jm = masses(tm);
      for (std::size_t i = 0; i < p0.size(); ++i) J[i].col(k) = (jp[i] - jm[i]) / (2 * h);
    }
    for (std::size_t i = 0; i < p0.size(); ++i) {
      const Eigen::Vector2d acc = (pp[i] - 2.0 * p0[i] + pm[i]) / (s * s);
      c += mass * J[i].transpose() * acc;
    }
    return c;
  }
};

// Frozen outputs of an external quadrature / point-mass computation.
namespace frozen {
inline constexpr double kArcQuarterX = 6.366197723675814e-02;  // theta = pi/2, l = 0.1
inline constexpr double kArcQuarterY = 6.366197723675814e-02;
inline constexpr double kArc30X = 9.549296585513721e-02;       // theta = 30 deg, l = 0.1
inline constexpr double kArc30Y = 2.558726308373679e-02;
// Shared-angle wrist, 4 x 0.02 m, 0.01 kg per chord midpoint, g = (-9.81, 0).
inline constexpr double kSharedM0 = 1.281250000000e-05;
inline constexpr double kSharedM30 = 1.264626210413e-05;
inline constexpr double kSharedG30 = -1.426680065319e-03;
}  // namespace frozen

}  // namespace testsupport
