#pragma once

// Fixed-step one-step integrators for x' = f(t, x).

#include <Eigen/Dense>

#include <functional>

namespace softwrist {

using OdeRhs = std::function<Eigen::VectorXd(double t, const Eigen::VectorXd& x)>;

enum class IntegratorKind { kRk4, kRadau };

Eigen::VectorXd rk4_step(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h);

struct RadauOptions {
  int max_newton_iterations = 12;
  double abs_tol = 1e-12;
  double rel_tol = 1e-10;
  double fd_relative_step = 1e-7;
  // Stalled Newton corrections below this many tolerances count as converged.
  double noise_floor = 100.0;
};

struct RadauStats {
  long steps = 0;
  long newton_iterations = 0;
  long jacobian_updates = 0;
  long rhs_evaluations = 0;
};

// Two-stage Radau IIA (order 3, L-stable, stiffly accurate) with simplified
// Newton iterations on a finite-difference Jacobian.  The Jacobian and the
// factorized iteration matrix are reused across steps while Newton keeps
// contracting, and refreshed otherwise.
class RadauIIA {
 public:
  explicit RadauIIA(RadauOptions options = {});

  Eigen::VectorXd step(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h);
  void reset();
  const RadauStats& stats() const { return stats_; }

 private:
  bool newton(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h, Eigen::VectorXd& z);
  void refresh(const OdeRhs& f, double t, const Eigen::VectorXd& x, double h);

  RadauOptions opt_;
  RadauStats stats_;
  Eigen::MatrixXd jac_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  double lu_h_ = 0.0;
  bool have_jacobian_ = false;
};

Eigen::MatrixXd finite_difference_jacobian(const OdeRhs& f, double t, const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& fx, double relative_step);

}  // namespace softwrist
