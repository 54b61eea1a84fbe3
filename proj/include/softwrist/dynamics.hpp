#pragma once

// Augmented rigid-chain dynamics of the wrist (one RPPR chain per segment,
// point mass at each chord midpoint) and its projection onto bending angles.

#include "softwrist/kinematics.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace softwrist {

// How the controlled coordinates q relate to the per-segment angles:
// kShared drives every segment with the same curvature (theta_b = S q, one
// wrist angle at disc 5); kIndependent uses theta_b directly.
enum class CoordinateMode { kShared, kIndependent };

struct WristModel {
  Geometry geometry = make_uniform_geometry(4, 0.02);
  double chord_mass = 0.01;        // kg per segment
  double stiffness = 0.615;        // N m / rad, whole-wrist bending
  double damping = 0.105;          // N m s / rad, whole-wrist bending
  double augmented_damping = 0.0;  // N m s per unit augmented rate, diagonal D_b
  Eigen::Vector2d gravity{-9.81, 0.0};  // m/s^2 in the bending plane
  double tendon_radius = 0.01;     // m
  // n x n_a signed moment arms; empty selects one antagonistic pair (+r, -r)
  // crossing every segment.
  Eigen::MatrixXd tendon_routing;
  CoordinateMode coordinates = CoordinateMode::kShared;

  int segments() const { return static_cast<int>(geometry.size()); }
  int dofs() const { return coordinates == CoordinateMode::kShared ? 1 : segments(); }
  int actuators() const { return static_cast<int>(moment_arms().cols()); }

  void validate() const;

  // theta_b = S q.  Shared mode: S_i = l_i / L, so the wrist stays one arc.
  Eigen::MatrixXd coordinate_map() const;
  // The whole-wrist coefficients act on segments as springs/dampers in
  // series: segment i gets coefficient * L / l_i.
  Eigen::MatrixXd segment_stiffness() const;
  Eigen::MatrixXd segment_damping() const;
  Eigen::MatrixXd moment_arms() const;
  // A_b (4n x n_a): each moment arm acts on both revolute joints of the
  // segment's RPPR chain, so J_mu^T A_b equals moment_arms() at every state.
  Eigen::MatrixXd actuation_matrix() const;
};

struct AugmentedTerms {
  Eigen::MatrixXd M_b;  // 4n x 4n
  Eigen::MatrixXd C_b;  // 4n x 4n, Christoffel symbols of M_b contracted with mu_dot
  Eigen::VectorXd G_b;  // 4n
};

AugmentedTerms augmented_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_dot,
                               const WristModel& model);

// Derivative tensor dM_b/dmu_k, k = 0..4n-1.
std::vector<Eigen::MatrixXd> augmented_inertia_derivatives(const Eigen::VectorXd& mu,
                                                           const WristModel& model);

// Planar positions of the chord point masses and the tip from the augmented chain.
struct AugmentedPoints {
  std::vector<Eigen::Vector2d> chord_masses;
  Eigen::Vector2d tip;
};
AugmentedPoints augmented_points(const Eigen::VectorXd& mu, const WristModel& model);

// Tip geometric Jacobian of the augmented chain in the plane (2 x 4n).
Eigen::MatrixXd augmented_tip_jacobian(const Eigen::VectorXd& mu, const WristModel& model);

// Mapped terms in whatever coordinates they were built for (theta_b from
// mapped_terms(), q after reduce()).
struct DynamicsTerms {
  Eigen::MatrixXd M;
  Eigen::MatrixXd C;         // J_mu^T M_b J_mu_dot + J_mu^T D_b J_mu, as in the mapped model
  Eigen::VectorXd coriolis;  // physically consistent centrifugal/Coriolis + D_b torque at the state
  Eigen::MatrixXd D;
  Eigen::MatrixXd K;
  Eigen::VectorXd G;
  Eigen::MatrixXd J;         // 2 x dof, tip Jacobian J_b J_mu
  Eigen::MatrixXd J_mu;
  Eigen::MatrixXd J_mu_dot;
};

DynamicsTerms mapped_terms(const PccState& state, const WristModel& model);

// Projection onto q through a constant map S (theta_b = S q).
DynamicsTerms reduce(const DynamicsTerms& terms, const Eigen::MatrixXd& S);

// Terms in the model's controlled coordinates (q, q_dot).
DynamicsTerms coordinate_terms(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                               const WristModel& model);
PccState segment_state(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot, const WristModel& model);

// Christoffel-consistent mapped Coriolis matrix J_mu^T C_b J_mu + J_mu^T M_b J_mu_dot
// (no damping); satisfies skew(M_dot - 2 C).
Eigen::MatrixXd consistent_coriolis_matrix(const PccState& state, const WristModel& model);

enum class CoriolisModel {
  kConsistent,  // plant: true centrifugal/Coriolis torque
  kPrinted,     // C of the mapped model as written (M_b J_mu_dot term + D_b term)
};

// theta_ddot = M^-1 (tau + J^T F - C_x q_dot - D q_dot - G - K q).
Eigen::VectorXd forward_dynamics(const DynamicsTerms& terms, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& q_dot, const Eigen::VectorXd& tau,
                                 const Eigen::Vector2d& f_ext,
                                 CoriolisModel model = CoriolisModel::kConsistent);

// Residual of the equation of motion for a given acceleration.
Eigen::VectorXd dynamics_residual(const DynamicsTerms& terms, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& q_dot, const Eigen::VectorXd& q_ddot,
                                  const Eigen::VectorXd& tau, const Eigen::Vector2d& f_ext,
                                  CoriolisModel model = CoriolisModel::kConsistent);

// Solves M x = rhs; throws SingularDynamics when M is not positive definite
// or its condition number exceeds 1e12.
Eigen::VectorXd solve_inertia(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs,
                              const std::string& where);

inline constexpr double kMaxInertiaCondition = 1e12;

double kinetic_energy(const DynamicsTerms& terms, const Eigen::VectorXd& q_dot);
// Spring plus gravitational potential in the model's coordinates.
double potential_energy(const Eigen::VectorXd& q, const WristModel& model);

struct TendonForces {
  Eigen::VectorXd forces;     // N, one per tendon
  bool has_negative = false;  // a tendon would have to push
};

// F_t = [S^T J_mu^T A_b]^-1 tau; exact solve when square, minimum-norm
// pseudo-inverse otherwise.
TendonForces tendon_forces(const Eigen::VectorXd& tau, const Eigen::VectorXd& q,
                           const WristModel& model);
// Generalized torque produced by tendon tensions.
Eigen::VectorXd tendon_torque(const Eigen::VectorXd& forces, const Eigen::VectorXd& q,
                              const WristModel& model);

}  // namespace softwrist
