#include "softwrist/integrators.hpp"

#include "softwrist/errors.hpp"

#include <cmath>
#include <sstream>

namespace softwrist {

namespace {

constexpr double kA[2][2] = {{5.0 / 12.0, -1.0 / 12.0}, {3.0 / 4.0, 1.0 / 4.0}};
constexpr double kC[2] = {1.0 / 3.0, 1.0};

}  // namespace

Eigen::VectorXd rk4_step(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd k1 = f(t, x);
  const Eigen::VectorXd k2 = f(t + 0.5 * h, x + 0.5 * h * k1);
  const Eigen::VectorXd k3 = f(t + 0.5 * h, x + 0.5 * h * k2);
  const Eigen::VectorXd k4 = f(t + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

Eigen::MatrixXd finite_difference_jacobian(const OdeRhs& f, double t, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, double relative_step) {
  const Eigen::Index m = x.size();
  Eigen::MatrixXd J(m, m);
  Eigen::VectorXd xp = x;
  for (Eigen::Index j = 0; j < m; ++j) {
    const double dx = relative_step * std::max(1.0, std::abs(x[j]));
    xp[j] = x[j] + dx;
    J.col(j) = (f(t, xp) - fx) / dx;
    xp[j] = x[j];
  }
  return J;
}

RadauIIA::RadauIIA(RadauOptions options) : opt_(options) {}

void RadauIIA::reset() {
  stats_ = {};
  have_jacobian_ = false;
  lu_h_ = 0.0;
}

void RadauIIA::refresh(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h) {
  const Eigen::VectorXd fx = f(t, x);
  jac_ = finite_difference_jacobian(f, t, x, fx, opt_.fd_relative_step);
  stats_.rhs_evaluations += x.size() + 1;
  ++stats_.jacobian_updates;
  have_jacobian_ = true;
  lu_h_ = 0.0;
  (void)h;
}

bool RadauIIA::newton(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h, Eigen::VectorXd& z) {
  const Eigen::Index m = x.size();
  if (lu_h_ != h) {
    Eigen::MatrixXd N = Eigen::MatrixXd::Identity(2 * m, 2 * m);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) N.block(i * m, j * m, m, m) -= h * kA[i][j] * jac_;
    lu_.compute(N);
    lu_h_ = h;
  }
  Eigen::VectorXd scale = (opt_.abs_tol + opt_.rel_tol * x.array().abs()).matrix();
  double previous = 0.0;
  for (int it = 0; it < opt_.max_newton_iterations; ++it) {
    const Eigen::VectorXd f1 = f(t + kC[0] * h, x + z.head(m));
    const Eigen::VectorXd f2 = f(t + kC[1] * h, x + z.tail(m));
    stats_.rhs_evaluations += 2;
    ++stats_.newton_iterations;
    if (!f1.allFinite() || !f2.allFinite()) return false;
    Eigen::VectorXd residual(2 * m);
    residual.head(m) = -z.head(m) + h * (kA[0][0] * f1 + kA[0][1] * f2);
    residual.tail(m) = -z.tail(m) + h * (kA[1][0] * f1 + kA[1][1] * f2);
    const Eigen::VectorXd dz = lu_.solve(residual);
    z += dz;
    if (!z.allFinite()) return false;
    double norm = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
      norm = std::max(norm, std::abs(dz[i]) / scale[i]);
      norm = std::max(norm, std::abs(dz[m + i]) / scale[i]);
    }
    if (norm <= 1.0) return true;
    // Stiff states can put the rounding floor of the residual above the
    // tolerance; once corrections stop shrinking close to it, take the iterate.
    if (it > 1 && norm < opt_.noise_floor && norm > 0.5 * previous) return true;
    // The first corrections can stall while the stiff modes settle; only
    // outright growth counts as divergence.
    if (it > 1 && norm > 2.0 * previous) return false;
    previous = norm;
  }
  return false;
}

Eigen::VectorXd RadauIIA::step(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h) {
  const Eigen::Index m = x.size();
  if (!have_jacobian_) refresh(f, t, x, h);
  Eigen::VectorXd z = Eigen::VectorXd::Zero(2 * m);
  if (!newton(f, t, x, h, z)) {
    // Stale Jacobian: rebuild at the step start and try once more.
    refresh(f, t, x, h);
    z.setZero();
    if (!newton(f, t, x, h, z)) {
      std::ostringstream os;
      os << "Radau IIA Newton iteration failed to converge at t=" << t << " (h=" << h << ")";
      throw IntegrationFailure(os.str());
    }
  }
  ++stats_.steps;
  return x + z.tail(m);
}

}  // namespace softwrist
