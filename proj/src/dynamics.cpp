#include "softwrist/dynamics.hpp"

#include "softwrist/errors.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace softwrist {

namespace {

// Frames of the augmented chain plus the joint axes/origins and their rates.
struct Chain {
  int joints = 0;
  std::vector<JointType> type;
  std::vector<Eigen::Vector3d> z;      // axis joint k acts along/about (frame k)
  std::vector<Eigen::Vector3d> o;      // origin of frame k, k = 0..joints
  std::vector<Eigen::Vector3d> omega;  // angular velocity of frame k
  std::vector<Eigen::Vector3d> o_dot;  // velocity of origin k
};

// dh_transform with the trigonometry the RPPR rows make trivial skipped:
// alpha is 0 or +/-pi/2 and prismatic rows have theta = 0.
Eigen::Matrix4d chain_link(const DhRow& row, const std::pair<double, double>* theta_trig) {
  double ct = 1.0, st = 0.0;
  if (theta_trig) {
    ct = theta_trig->first;
    st = theta_trig->second;
  } else if (row.theta != 0.0) {
    ct = std::cos(row.theta);
    st = std::sin(row.theta);
  }
  double ca, sa;
  constexpr double half_pi = std::numbers::pi / 2.0;
  if (row.alpha == 0.0) {
    ca = 1.0, sa = 0.0;
  } else if (row.alpha == half_pi) {
    ca = 0.0, sa = 1.0;
  } else if (row.alpha == -half_pi) {
    ca = 0.0, sa = -1.0;
  } else {
    ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  }
  Eigen::Matrix4d T;
  T << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

Chain build_chain(const Eigen::VectorXd& mu, const Eigen::VectorXd* mu_dot) {
  const int segments = static_cast<int>(mu.size() / 4);
  Chain c;
  c.joints = 4 * segments;
  c.type.reserve(c.joints);
  c.z.reserve(c.joints);
  c.o.reserve(c.joints + 1);
  c.omega.reserve(c.joints + 1);
  c.o_dot.reserve(c.joints + 1);

  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  c.o.push_back(Eigen::Vector3d::Zero());
  c.omega.push_back(Eigen::Vector3d::Zero());
  c.o_dot.push_back(Eigen::Vector3d::Zero());

  for (int s = 0; s < segments; ++s) {
    const std::span<const double, 4> block(mu.data() + 4 * s, 4);
    const auto rows = rppr_rows(block);
    // Both revolute joints of a segment normally turn by the same theta/2.
    const std::pair<double, double> trig0{std::cos(block[0]), std::sin(block[0])};
    const std::pair<double, double> trig3 =
        block[3] == block[0] ? trig0 : std::pair<double, double>{std::cos(block[3]), std::sin(block[3])};
    for (int r = 0; r < 4; ++r) {
      const int k = 4 * s + r;
      const JointType jt = kRpprJoints[static_cast<std::size_t>(r)];
      const Eigen::Matrix3d R = T.block<3, 3>(0, 0);
      const Eigen::Vector3d zk = R.col(2);
      c.type.push_back(jt);
      c.z.push_back(zk);

      const DhRow& row = rows[static_cast<std::size_t>(r)];
      T = T * chain_link(row, r == 0 ? &trig0 : (r == 3 ? &trig3 : nullptr));
      c.o.push_back(T.block<3, 1>(0, 3));

      const double rate = mu_dot ? (*mu_dot)[k] : 0.0;
      const Eigen::Vector3d& w = c.omega[static_cast<std::size_t>(k)];
      const Eigen::Vector3d link = c.o.back() - c.o[static_cast<std::size_t>(k)];
      const double theta_rate = jt == JointType::kRevolute ? rate : 0.0;
      const double d_rate = jt == JointType::kPrismatic ? rate : 0.0;
      const Eigen::Vector3d r_dot = row.a == 0.0 ? Eigen::Vector3d(0.0, 0.0, d_rate)
                                                : Eigen::Vector3d(-row.a * std::sin(row.theta) * theta_rate,
                                                                  row.a * std::cos(row.theta) * theta_rate, d_rate);
      c.o_dot.push_back(c.o_dot[static_cast<std::size_t>(k)] + w.cross(link) + R * r_dot);
      c.omega.push_back(w + zk * theta_rate);
    }
  }
  return c;
}

// Geometric position Jacobian of a point rigidly attached to frame `frame`
// (only joints 0..frame-1 move it).
Eigen::MatrixXd point_jacobian(const Chain& c, const Eigen::Vector3d& p, int frame) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(3, c.joints);
  for (int j = 0; j < frame; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    J.col(j) = c.type[uj] == JointType::kRevolute ? Eigen::Vector3d(c.z[uj].cross(p - c.o[uj]))
                                                  : c.z[uj];
  }
  return J;
}

// J_dot * mu_dot for the same point.
Eigen::Vector3d point_bias(const Chain& c, const Eigen::Vector3d& p, const Eigen::Vector3d& p_dot,
                           int frame, const Eigen::VectorXd& mu_dot) {
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  for (int j = 0; j < frame; ++j) {
    const auto uj = static_cast<std::size_t>(j);
    const Eigen::Vector3d z_dot = c.omega[uj].cross(c.z[uj]);
    Eigen::Vector3d col_dot;
    if (c.type[uj] == JointType::kRevolute) {
      col_dot = z_dot.cross(p - c.o[uj]) + c.z[uj].cross(p_dot - c.o_dot[uj]);
    } else {
      col_dot = z_dot;
    }
    acc += col_dot * mu_dot[j];
  }
  return acc;
}

// dJ/dmu_k for the point, k = 0..joints-1.
std::vector<Eigen::MatrixXd> point_hessian(const Chain& c, const Eigen::Vector3d& p,
                                           const Eigen::MatrixXd& J, int frame) {
  std::vector<Eigen::MatrixXd> H(static_cast<std::size_t>(c.joints),
                                 Eigen::MatrixXd::Zero(3, c.joints));
  for (int k = 0; k < frame; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    auto& Hk = H[uk];
    for (int j = 0; j < frame; ++j) {
      const auto uj = static_cast<std::size_t>(j);
      const bool rev_j = c.type[uj] == JointType::kRevolute;
      if (k <= j) {
        // Joint k moves joint j's axis, origin and the point rigidly.
        if (c.type[uk] != JointType::kRevolute) continue;
        const Eigen::Vector3d dz = c.z[uk].cross(c.z[uj]);
        if (rev_j) {
          const Eigen::Vector3d r = p - c.o[uj];
          Hk.col(j) = dz.cross(r) + c.z[uj].cross(c.z[uk].cross(r));
        } else {
          Hk.col(j) = dz;
        }
      } else if (rev_j) {
        // Joint k is distal: only the point moves.
        Hk.col(j) = c.z[uj].cross(Eigen::Vector3d(J.col(k)));
      }
    }
  }
  return H;
}

int chord_frame(int segment) { return 4 * segment + kChordMassLink + 1; }

void check_mu(const Eigen::VectorXd& mu, const WristModel& model) {
  model.validate();
  if (mu.size() != 4 * model.segments()) {
    std::ostringstream os;
    os << "augmented configuration has " << mu.size() << " entries, expected " << 4 * model.segments();
    throw InvalidParameter(os.str());
  }
}

}  // namespace

void WristModel::validate() const {
  validate_geometry(geometry);
  if (!(chord_mass >= 0.0) || !std::isfinite(chord_mass)) throw InvalidParameter("chord mass must be >= 0");
  if (!(stiffness >= 0.0) || !std::isfinite(stiffness)) throw InvalidParameter("stiffness must be >= 0");
  if (!(damping >= 0.0) || !std::isfinite(damping)) throw InvalidParameter("damping must be >= 0");
  if (!(augmented_damping >= 0.0)) throw InvalidParameter("augmented damping must be >= 0");
  if (!gravity.allFinite()) throw InvalidParameter("gravity must be finite");
  if (tendon_routing.size() != 0) {
    if (tendon_routing.rows() != segments() || tendon_routing.cols() < 1) {
      throw InvalidParameter("tendon routing must be segments x actuators");
    }
    if (!tendon_routing.allFinite()) throw InvalidParameter("tendon routing must be finite");
  } else if (!(tendon_radius > 0.0)) {
    throw InvalidParameter("tendon radius must be positive");
  }
}

Eigen::MatrixXd WristModel::coordinate_map() const {
  const int n = segments();
  if (coordinates == CoordinateMode::kIndependent) return Eigen::MatrixXd::Identity(n, n);
  const double L = total_length(geometry);
  Eigen::MatrixXd S(n, 1);
  for (int i = 0; i < n; ++i) S(i, 0) = geometry[static_cast<std::size_t>(i)].length / L;
  return S;
}

Eigen::MatrixXd WristModel::segment_stiffness() const {
  const double L = total_length(geometry);
  Eigen::VectorXd k(segments());
  for (int i = 0; i < segments(); ++i) k[i] = stiffness * L / geometry[static_cast<std::size_t>(i)].length;
  return k.asDiagonal();
}

Eigen::MatrixXd WristModel::segment_damping() const {
  const double L = total_length(geometry);
  Eigen::VectorXd d(segments());
  for (int i = 0; i < segments(); ++i) d[i] = damping * L / geometry[static_cast<std::size_t>(i)].length;
  return d.asDiagonal();
}

Eigen::MatrixXd WristModel::moment_arms() const {
  if (tendon_routing.size() != 0) return tendon_routing;
  Eigen::MatrixXd R(segments(), 2);
  R.col(0).setConstant(tendon_radius);
  R.col(1).setConstant(-tendon_radius);
  return R;
}

Eigen::MatrixXd WristModel::actuation_matrix() const {
  const Eigen::MatrixXd R = moment_arms();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(4 * segments(), R.cols());
  for (int i = 0; i < segments(); ++i) {
    A.row(4 * i) = R.row(i);
    A.row(4 * i + 3) = R.row(i);
  }
  return A;
}

AugmentedPoints augmented_points(const Eigen::VectorXd& mu, const WristModel& model) {
  check_mu(mu, model);
  const Chain c = build_chain(mu, nullptr);
  AugmentedPoints pts;
  for (int s = 0; s < model.segments(); ++s) {
    pts.chord_masses.push_back(project_planar(c.o[static_cast<std::size_t>(chord_frame(s))]));
  }
  pts.tip = project_planar(c.o.back());
  return pts;
}

Eigen::MatrixXd augmented_tip_jacobian(const Eigen::VectorXd& mu, const WristModel& model) {
  check_mu(mu, model);
  const Chain c = build_chain(mu, nullptr);
  const Eigen::MatrixXd J3 = point_jacobian(c, c.o.back(), c.joints);
  return (plane_to_dh().transpose() * J3).topRows(2);
}

AugmentedTerms augmented_terms(const Eigen::VectorXd& mu, const Eigen::VectorXd& mu_dot,
                               const WristModel& model) {
  check_mu(mu, model);
  if (mu_dot.size() != mu.size()) throw InvalidParameter("mu_dot length does not match mu");
  const Chain c = build_chain(mu, &mu_dot);
  const int N = c.joints;
  const Eigen::Vector3d g = embed_planar(model.gravity);

  AugmentedTerms out;
  out.M_b = Eigen::MatrixXd::Zero(N, N);
  out.G_b = Eigen::VectorXd::Zero(N);
  for (int s = 0; s < model.segments(); ++s) {
    const int f = chord_frame(s);
    const Eigen::MatrixXd J = point_jacobian(c, c.o[static_cast<std::size_t>(f)], f);
    out.M_b.noalias() += model.chord_mass * J.transpose() * J;
    out.G_b.noalias() -= model.chord_mass * J.transpose() * g;
  }

  const auto dM = augmented_inertia_derivatives(mu, model);
  out.C_b = Eigen::MatrixXd::Zero(N, N);
  for (int k = 0; k < N; ++k) {
    const double rate = mu_dot[k];
    if (rate == 0.0) continue;
    const auto& dMk = dM[static_cast<std::size_t>(k)];
    for (int i = 0; i < N; ++i) {
      for (int j = 0; j < N; ++j) {
        const double christoffel = 0.5 * (dMk(i, j) + dM[static_cast<std::size_t>(j)](i, k) -
                                          dM[static_cast<std::size_t>(i)](j, k));
        out.C_b(i, j) += christoffel * rate;
      }
    }
  }
  return out;
}

std::vector<Eigen::MatrixXd> augmented_inertia_derivatives(const Eigen::VectorXd& mu,
                                                           const WristModel& model) {
  check_mu(mu, model);
  const Chain c = build_chain(mu, nullptr);
  const int N = c.joints;
  std::vector<Eigen::MatrixXd> dM(static_cast<std::size_t>(N), Eigen::MatrixXd::Zero(N, N));
  for (int s = 0; s < model.segments(); ++s) {
    const int f = chord_frame(s);
    const Eigen::Vector3d p = c.o[static_cast<std::size_t>(f)];
    const Eigen::MatrixXd J = point_jacobian(c, p, f);
    const auto H = point_hessian(c, p, J, f);
    for (int k = 0; k < f; ++k) {
      const Eigen::MatrixXd JtH = J.transpose() * H[static_cast<std::size_t>(k)];
      dM[static_cast<std::size_t>(k)] += model.chord_mass * (JtH + JtH.transpose());
    }
  }
  return dM;
}

PccState segment_state(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot, const WristModel& model) {
  const Eigen::MatrixXd S = model.coordinate_map();
  if (q.size() != S.cols() || q_dot.size() != S.cols()) {
    std::ostringstream os;
    os << "expected " << S.cols() << " coordinates, got q=" << q.size() << " q_dot=" << q_dot.size();
    throw InvalidParameter(os.str());
  }
  return {S * q, S * q_dot};
}

DynamicsTerms mapped_terms(const PccState& state, const WristModel& model) {
  model.validate();
  const AugmentedConfiguration ac = augmented_configuration(state, model.geometry);
  const Eigen::VectorXd mu_dot = ac.j_mu * state.theta_dot;
  const Chain c = build_chain(ac.mu, &mu_dot);
  const int n = model.segments();
  const Eigen::Vector3d g = embed_planar(model.gravity);
  const Eigen::VectorXd jmu_dot_rate = ac.j_mu_dot * state.theta_dot;

  DynamicsTerms t;
  t.M = Eigen::MatrixXd::Zero(n, n);
  t.C = Eigen::MatrixXd::Zero(n, n);
  t.coriolis = Eigen::VectorXd::Zero(n);
  t.G = Eigen::VectorXd::Zero(n);
  // J_mu is block diagonal, so J_b J_mu is assembled column by column from
  // the (at most four) joints of each segment.
  Eigen::Matrix3Xd Jq(3, n), Jq_dot(3, n);
  for (int s = 0; s < n; ++s) {
    const int f = chord_frame(s);
    const auto uf = static_cast<std::size_t>(f);
    const Eigen::Vector3d& p = c.o[uf];
    Eigen::Vector3d bias = point_bias(c, p, c.o_dot[uf], f, mu_dot);
    Jq.setZero();
    Jq_dot.setZero();
    for (int k = 0; k < f; ++k) {
      const auto uk = static_cast<std::size_t>(k);
      const Eigen::Vector3d col =
          c.type[uk] == JointType::kRevolute ? Eigen::Vector3d(c.z[uk].cross(p - c.o[uk])) : c.z[uk];
      const int seg = k / 4;
      Jq.col(seg) += col * ac.j_mu(k, seg);
      Jq_dot.col(seg) += col * ac.j_mu_dot(k, seg);
      bias += col * jmu_dot_rate[k];
    }
    const double m = model.chord_mass;
    t.M.noalias() += m * Jq.transpose() * Jq;
    t.C.noalias() += m * Jq.transpose() * Jq_dot;
    t.coriolis.noalias() += m * Jq.transpose() * bias;
    t.G.noalias() -= m * Jq.transpose() * g;
  }
  if (model.augmented_damping > 0.0) {
    const Eigen::MatrixXd Dmap = model.augmented_damping * ac.j_mu.transpose() * ac.j_mu;
    t.C += Dmap;
    t.coriolis += Dmap * state.theta_dot;
  }
  // Symmetrize away round-off so downstream Cholesky sees an exactly symmetric matrix.
  t.M = 0.5 * (t.M + t.M.transpose()).eval();
  t.D = model.segment_damping();
  t.K = model.segment_stiffness();
  Jq.setZero();
  const Eigen::Vector3d& tip = c.o.back();
  for (int k = 0; k < c.joints; ++k) {
    const auto uk = static_cast<std::size_t>(k);
    const Eigen::Vector3d col =
        c.type[uk] == JointType::kRevolute ? Eigen::Vector3d(c.z[uk].cross(tip - c.o[uk])) : c.z[uk];
    Jq.col(k / 4) += col * ac.j_mu(k, k / 4);
  }
  t.J = (plane_to_dh().transpose() * Jq).topRows(2);
  t.J_mu = ac.j_mu;
  t.J_mu_dot = ac.j_mu_dot;
  return t;
}

DynamicsTerms reduce(const DynamicsTerms& terms, const Eigen::MatrixXd& S) {
  DynamicsTerms r;
  const Eigen::MatrixXd St = S.transpose();
  r.M = St * terms.M * S;
  r.C = St * terms.C * S;
  r.coriolis = St * terms.coriolis;
  r.D = St * terms.D * S;
  r.K = St * terms.K * S;
  r.G = St * terms.G;
  r.J = terms.J * S;
  r.J_mu = terms.J_mu * S;
  r.J_mu_dot = terms.J_mu_dot * S;
  return r;
}

DynamicsTerms coordinate_terms(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot,
                               const WristModel& model) {
  const PccState s = segment_state(q, q_dot, model);
  DynamicsTerms t = mapped_terms(s, model);
  if (model.coordinates == CoordinateMode::kIndependent) return t;
  return reduce(t, model.coordinate_map());
}

Eigen::MatrixXd consistent_coriolis_matrix(const PccState& state, const WristModel& model) {
  const AugmentedConfiguration ac = augmented_configuration(state, model.geometry);
  const Eigen::VectorXd mu_dot = ac.j_mu * state.theta_dot;
  const AugmentedTerms aug = augmented_terms(ac.mu, mu_dot, model);
  return ac.j_mu.transpose() * (aug.C_b * ac.j_mu + aug.M_b * ac.j_mu_dot);
}

Eigen::VectorXd solve_inertia(const Eigen::MatrixXd& M, const Eigen::VectorXd& rhs, const std::string& where) {
  auto fail = [&](const std::string& why) {
    throw SingularDynamics("mapped inertia " + why + " at " + where);
  };
  if (M.rows() == 1) {
    const double m = M(0, 0);
    if (!(m > 0.0) || !std::isfinite(m)) fail("is not positive");
    return rhs / m;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) fail("is not positive definite");
  if (llt.rcond() < 1.0 / kMaxInertiaCondition) fail("is ill-conditioned");
  return llt.solve(rhs);
}

namespace {

std::string describe(const Eigen::VectorXd& q, const Eigen::VectorXd& q_dot) {
  Eigen::IOFormat fmt(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "[", "]");
  std::ostringstream os;
  os << "q=" << q.transpose().format(fmt) << " q_dot=" << q_dot.transpose().format(fmt);
  return os.str();
}

Eigen::VectorXd velocity_torque(const DynamicsTerms& terms, const Eigen::VectorXd& q_dot, CoriolisModel model) {
  const Eigen::VectorXd cor = model == CoriolisModel::kPrinted ? Eigen::VectorXd(terms.C * q_dot) : terms.coriolis;
  return cor + terms.D * q_dot;
}

}  // namespace

Eigen::VectorXd forward_dynamics(const DynamicsTerms& terms, const Eigen::VectorXd& q,
                                 const Eigen::VectorXd& q_dot, const Eigen::VectorXd& tau,
                                 const Eigen::Vector2d& f_ext, CoriolisModel model) {
  if (tau.size() != q.size()) throw InvalidParameter("torque length does not match coordinates");
  const Eigen::VectorXd rhs =
      tau + terms.J.transpose() * f_ext - velocity_torque(terms, q_dot, model) - terms.G - terms.K * q;
  return solve_inertia(terms.M, rhs, describe(q, q_dot));
}

Eigen::VectorXd dynamics_residual(const DynamicsTerms& terms, const Eigen::VectorXd& q,
                                  const Eigen::VectorXd& q_dot, const Eigen::VectorXd& q_ddot,
                                  const Eigen::VectorXd& tau, const Eigen::Vector2d& f_ext,
                                  CoriolisModel model) {
  return terms.M * q_ddot + velocity_torque(terms, q_dot, model) + terms.G + terms.K * q - tau -
         terms.J.transpose() * f_ext;
}

double kinetic_energy(const DynamicsTerms& terms, const Eigen::VectorXd& q_dot) {
  return 0.5 * q_dot.dot(terms.M * q_dot);
}

double potential_energy(const Eigen::VectorXd& q, const WristModel& model) {
  const PccState s = segment_state(q, Eigen::VectorXd::Zero(q.size()), model);
  double v = 0.5 * s.theta.dot(model.segment_stiffness() * s.theta);
  const AugmentedPoints pts = augmented_points(augmented_map(s.theta, model.geometry), model);
  for (const auto& p : pts.chord_masses) v -= model.chord_mass * model.gravity.dot(p);
  return v;
}

namespace {

Eigen::MatrixXd tendon_map(const Eigen::VectorXd& q, const WristModel& model) {
  const PccState s = segment_state(q, Eigen::VectorXd::Zero(q.size()), model);
  const Eigen::MatrixXd J_mu = jacobian_mu(s.theta, model.geometry);
  return model.coordinate_map().transpose() * J_mu.transpose() * model.actuation_matrix();
}

}  // namespace

TendonForces tendon_forces(const Eigen::VectorXd& tau, const Eigen::VectorXd& q, const WristModel& model) {
  const Eigen::MatrixXd A = tendon_map(q, model);
  if (tau.size() != A.rows()) throw InvalidParameter("torque length does not match coordinates");
  TendonForces out;
  if (A.rows() == A.cols()) {
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    if (!lu.isInvertible() || lu.rcond() < 1e-12) {
      throw ActuationSingularity("square tendon map J_mu^T A_b is singular");
    }
    out.forces = lu.solve(tau);
  } else {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(A);
    cod.setThreshold(1e-12);
    if (cod.rank() < A.rows()) {
      throw ActuationSingularity("tendon map J_mu^T A_b does not span the controlled coordinates");
    }
    out.forces = cod.solve(tau);
  }
  out.has_negative = (out.forces.array() < 0.0).any();
  return out;
}

Eigen::VectorXd tendon_torque(const Eigen::VectorXd& forces, const Eigen::VectorXd& q, const WristModel& model) {
  return tendon_map(q, model) * forces;
}

}  // namespace softwrist
