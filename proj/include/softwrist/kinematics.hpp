#pragma once

// Planar piecewise-constant-curvature kinematics and the RPPR augmented
// rigid-chain parameterization of each constant-curvature segment.

#include <Eigen/Dense>

#include <array>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace softwrist {

inline constexpr double kSeriesThreshold = 1e-4;            // rad, segment transform / mu series switch
inline constexpr double kDerivativeSeriesThreshold = 1e-2;  // rad, second-derivative series switch
inline constexpr double kThetaMax = 50.0 * std::numbers::pi / 180.0;

struct SegmentGeometry {
  double length = 0.02;  // m, arc length
  int index = 1;         // 1-based ordinal along the wrist
};

using Geometry = std::vector<SegmentGeometry>;

Geometry make_uniform_geometry(int segments, double length);
double total_length(std::span<const SegmentGeometry> geometry);
void validate_geometry(std::span<const SegmentGeometry> geometry);

// Per-segment bending angles and rates.
struct PccState {
  Eigen::VectorXd theta;
  Eigen::VectorXd theta_dot;

  static PccState zero(int n) { return {Eigen::VectorXd::Zero(n), Eigen::VectorXd::Zero(n)}; }
};

// 3x3 planar homogeneous transform: rotation block, translation column, [0 0 1].
using Transform2 = Eigen::Matrix3d;

Transform2 segment_transform(double theta, double length);

// Cumulative frames 0T1 ... 0Tn.
std::vector<Transform2> forward_kinematics(const Eigen::VectorXd& theta,
                                           std::span<const SegmentGeometry> geometry);
Eigen::Vector2d tip_position(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry);

// Angles with |theta_i| > kThetaMax, reported as human-readable warnings.
std::vector<std::string> range_warnings(const Eigen::VectorXd& theta);

// mu = [theta/2, d, d, theta/2] per segment with d = l sin(theta/2) / theta.
struct AugmentedConfiguration {
  Eigen::VectorXd mu;        // 4n
  Eigen::MatrixXd j_mu;      // 4n x n, d mu / d theta
  Eigen::MatrixXd j_mu_dot;  // 4n x n, (d J_mu / d theta) theta_dot
};

Eigen::VectorXd augmented_map(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry);
Eigen::MatrixXd jacobian_mu(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry);
Eigen::MatrixXd jacobian_mu_dot(const PccState& state, std::span<const SegmentGeometry> geometry);
AugmentedConfiguration augmented_configuration(const PccState& state,
                                               std::span<const SegmentGeometry> geometry);

// Half-chord d(theta) = l sin(theta/2)/theta and its first two derivatives.
struct HalfChord {
  double value;
  double first;
  double second;
};
HalfChord half_chord(double theta, double length);

// Standard DH: Rz(theta) Tz(d) Tx(a) Rx(alpha).
struct DhRow {
  double theta;
  double d;
  double a;
  double alpha;
};

enum class JointType { kRevolute, kPrismatic };

Eigen::Matrix4d dh_transform(const DhRow& row);

// The four DH rows of one segment's RPPR chain evaluated at its mu block.
std::array<DhRow, 4> rppr_rows(std::span<const double, 4> mu_segment);
inline constexpr std::array<JointType, 4> kRpprJoints = {JointType::kRevolute, JointType::kPrismatic,
                                                         JointType::kPrismatic, JointType::kRevolute};
// Index (0..3) of the link carrying the chord point mass.
inline constexpr int kChordMassLink = 1;

Eigen::Matrix4d rppr_segment_frame(std::span<const double, 4> mu_segment);

// The RPPR chain lives in a DH base frame whose -y axis is the wrist axis.
// The bending plane (x along the wrist, y toward bending) maps onto it by a
// fixed rotation about z; plane_to_dh() embeds plane vectors, and
// planar_from_dh() conjugates a DH-frame transform back into the plane.
Eigen::Matrix3d plane_to_dh();
Eigen::Vector3d embed_planar(const Eigen::Vector2d& v);
Eigen::Vector2d project_planar(const Eigen::Vector3d& v);
Transform2 planar_from_dh(const Eigen::Matrix4d& dh_frame);

}  // namespace softwrist
