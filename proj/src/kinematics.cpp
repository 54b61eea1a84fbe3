#include "softwrist/kinematics.hpp"

#include "softwrist/errors.hpp"

#include <cmath>
#include <sstream>

namespace softwrist {

namespace {

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) {
    throw InvalidParameter(std::string(what) + " must be finite");
  }
}

void require_matching(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry) {
  validate_geometry(geometry);
  if (theta.size() != static_cast<Eigen::Index>(geometry.size())) {
    std::ostringstream os;
    os << "state has " << theta.size() << " bending angles but geometry has " << geometry.size()
       << " segments";
    throw InvalidParameter(os.str());
  }
  for (Eigen::Index i = 0; i < theta.size(); ++i) require_finite(theta[i], "bending angle");
}

// sin(t)/t and (1 - cos(t))/t.
double sinc(double t) {
  if (std::abs(t) < kSeriesThreshold) {
    const double t2 = t * t;
    return 1.0 - t2 / 6.0 + t2 * t2 / 120.0;
  }
  return std::sin(t) / t;
}

double versinc(double t) {
  if (std::abs(t) < kSeriesThreshold) {
    const double t2 = t * t;
    return t / 2.0 - t * t2 / 24.0 + t * t2 * t2 / 720.0;
  }
  return (1.0 - std::cos(t)) / t;
}

}  // namespace

Geometry make_uniform_geometry(int segments, double length) {
  if (segments < 1) throw InvalidParameter("segment count must be >= 1");
  Geometry g;
  g.reserve(segments);
  for (int i = 0; i < segments; ++i) g.push_back({length, i + 1});
  validate_geometry(g);
  return g;
}

double total_length(std::span<const SegmentGeometry> geometry) {
  double sum = 0.0;
  for (const auto& s : geometry) sum += s.length;
  return sum;
}

void validate_geometry(std::span<const SegmentGeometry> geometry) {
  if (geometry.empty()) throw InvalidParameter("geometry needs at least one segment");
  for (const auto& s : geometry) {
    if (!(s.length > 0.0) || !std::isfinite(s.length)) {
      std::ostringstream os;
      os << "segment " << s.index << " length must be positive and finite, got " << s.length;
      throw InvalidParameter(os.str());
    }
  }
}

Transform2 segment_transform(double theta, double length) {
  require_finite(theta, "bending angle");
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw InvalidParameter("segment length must be positive and finite");
  }
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Transform2 T;
  T << c, -s, length * sinc(theta),
       s, c, length * versinc(theta),
       0.0, 0.0, 1.0;
  return T;
}

std::vector<Transform2> forward_kinematics(const Eigen::VectorXd& theta,
                                           std::span<const SegmentGeometry> geometry) {
  require_matching(theta, geometry);
  std::vector<Transform2> frames;
  frames.reserve(geometry.size());
  Transform2 acc = Transform2::Identity();
  for (std::size_t i = 0; i < geometry.size(); ++i) {
    acc = acc * segment_transform(theta[static_cast<Eigen::Index>(i)], geometry[i].length);
    frames.push_back(acc);
  }
  return frames;
}

Eigen::Vector2d tip_position(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry) {
  const auto frames = forward_kinematics(theta, geometry);
  return frames.back().block<2, 1>(0, 2);
}

std::vector<std::string> range_warnings(const Eigen::VectorXd& theta) {
  std::vector<std::string> out;
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    if (std::abs(theta[i]) > kThetaMax) {
      std::ostringstream os;
      os << "bending angle " << i << " = " << theta[i] << " rad exceeds the +/-" << kThetaMax
         << " rad range of motion";
      out.push_back(os.str());
    }
  }
  return out;
}

HalfChord half_chord(double theta, double length) {
  const double t = theta;
  const double t2 = t * t;
  HalfChord h{};
  if (std::abs(t) < kSeriesThreshold) {
    h.value = length * (0.5 - t2 / 48.0 + t2 * t2 / 3840.0);
  } else {
    h.value = length * std::sin(0.5 * t) / t;
  }
  // First derivative cancels like eps/theta, second like eps/theta^2, so the
  // series branch extends further for the derivatives.
  if (std::abs(t) < kDerivativeSeriesThreshold) {
    h.first = length * (-t / 24.0 + t * t2 / 960.0 - t * t2 * t2 / 107520.0);
    h.second = length * (-1.0 / 24.0 + t2 / 320.0 - t2 * t2 / 21504.0);
  } else {
    const double s = std::sin(0.5 * t);
    const double c = std::cos(0.5 * t);
    h.first = length * (0.5 * c * t - s) / t2;
    h.second = length * (-0.25 * s / t - c / t2 + 2.0 * s / (t2 * t));
  }
  return h;
}

Eigen::VectorXd augmented_map(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry) {
  require_matching(theta, geometry);
  const Eigen::Index n = theta.size();
  Eigen::VectorXd mu(4 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = half_chord(theta[i], geometry[static_cast<std::size_t>(i)].length).value;
    mu.segment<4>(4 * i) << 0.5 * theta[i], d, d, 0.5 * theta[i];
  }
  return mu;
}

Eigen::MatrixXd jacobian_mu(const Eigen::VectorXd& theta, std::span<const SegmentGeometry> geometry) {
  require_matching(theta, geometry);
  const Eigen::Index n = theta.size();
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(4 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double dd = half_chord(theta[i], geometry[static_cast<std::size_t>(i)].length).first;
    J.block<4, 1>(4 * i, i) << 0.5, dd, dd, 0.5;
  }
  return J;
}

Eigen::MatrixXd jacobian_mu_dot(const PccState& state, std::span<const SegmentGeometry> geometry) {
  require_matching(state.theta, geometry);
  if (state.theta_dot.size() != state.theta.size()) {
    throw InvalidParameter("theta_dot length does not match theta");
  }
  const Eigen::Index n = state.theta.size();
  Eigen::MatrixXd Jd = Eigen::MatrixXd::Zero(4 * n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    require_finite(state.theta_dot[i], "bending rate");
    const double d2 = half_chord(state.theta[i], geometry[static_cast<std::size_t>(i)].length).second;
    const double v = d2 * state.theta_dot[i];
    Jd.block<4, 1>(4 * i, i) << 0.0, v, v, 0.0;
  }
  return Jd;
}

AugmentedConfiguration augmented_configuration(const PccState& state,
                                               std::span<const SegmentGeometry> geometry) {
  return {augmented_map(state.theta, geometry), jacobian_mu(state.theta, geometry),
          jacobian_mu_dot(state, geometry)};
}

Eigen::Matrix4d dh_transform(const DhRow& row) {
  const double ct = std::cos(row.theta), st = std::sin(row.theta);
  const double ca = std::cos(row.alpha), sa = std::sin(row.alpha);
  Eigen::Matrix4d T;
  T << ct, -st * ca, st * sa, row.a * ct,
       st, ct * ca, -ct * sa, row.a * st,
       0.0, sa, ca, row.d,
       0.0, 0.0, 0.0, 1.0;
  return T;
}

std::array<DhRow, 4> rppr_rows(std::span<const double, 4> mu) {
  constexpr double half_pi = std::numbers::pi / 2.0;
  return {DhRow{mu[0], 0.0, 0.0, half_pi}, DhRow{0.0, mu[1], 0.0, 0.0},
          DhRow{0.0, mu[2], 0.0, -half_pi}, DhRow{mu[3], 0.0, 0.0, 0.0}};
}

Eigen::Matrix4d rppr_segment_frame(std::span<const double, 4> mu_segment) {
  Eigen::Matrix4d T = Eigen::Matrix4d::Identity();
  for (const auto& row : rppr_rows(mu_segment)) T = T * dh_transform(row);
  return T;
}

Eigen::Matrix3d plane_to_dh() {
  // Rz(-pi/2): plane x (wrist axis) -> DH -y, plane y -> DH x.
  Eigen::Matrix3d P;
  P << 0.0, 1.0, 0.0,
      -1.0, 0.0, 0.0,
       0.0, 0.0, 1.0;
  return P;
}

Eigen::Vector3d embed_planar(const Eigen::Vector2d& v) {
  return plane_to_dh() * Eigen::Vector3d(v.x(), v.y(), 0.0);
}

Eigen::Vector2d project_planar(const Eigen::Vector3d& v) {
  const Eigen::Vector3d p = plane_to_dh().transpose() * v;
  return {p.x(), p.y()};
}

Transform2 planar_from_dh(const Eigen::Matrix4d& dh_frame) {
  const Eigen::Matrix3d P = plane_to_dh();
  const Eigen::Matrix3d R = P.transpose() * dh_frame.block<3, 3>(0, 0) * P;
  const Eigen::Vector3d t = P.transpose() * dh_frame.block<3, 1>(0, 3);
  Transform2 T = Transform2::Identity();
  T.block<2, 2>(0, 0) = R.block<2, 2>(0, 0);
  T.block<2, 1>(0, 2) = t.head<2>();
  return T;
}

}  // namespace softwrist
