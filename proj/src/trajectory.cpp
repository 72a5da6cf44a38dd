// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/trajectory.hpp"

#include <cmath>
#include <numbers>

#include "relicforge/error.hpp"

namespace relicforge {

namespace {

constexpr double kOrthonormalTol = 1e-6;
// Renormalization threshold; keeps already-unit quaternions bit-identical.
constexpr double kRenormTol = 1e-14;
constexpr double kGimbalEps = 1e-10;

Mat3 rot_x(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitX()).toRotationMatrix();
}
Mat3 rot_y(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitY()).toRotationMatrix();
}
Mat3 rot_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

// (-pi, pi]
double wrap_half_open(double a) { return a <= -std::numbers::pi ? a + 2.0 * std::numbers::pi : a; }

}  // namespace

CameraPose::CameraPose(const Vec3& position, const Quat& world_to_camera, double timestamp)
    : position_(position), rotation_(world_to_camera), timestamp_(timestamp) {
  if (!std::isfinite(timestamp)) throw ValidationError("timestamp is not finite");
  if (!position.allFinite()) throw ValidationError("position is not finite");
  if (!rotation_.coeffs().allFinite()) throw ValidationError("rotation is not finite");
  const double n = rotation_.norm();
  if (std::abs(n - 1.0) > kOrthonormalTol) {
    throw ValidationError("rotation quaternion norm " + std::to_string(n) + " is not 1");
  }
  if (std::abs(n - 1.0) > kRenormTol) rotation_.normalize();
}

CameraPose CameraPose::from_matrix(const Vec3& position, const Mat3& world_to_camera,
                                   double timestamp) {
  const double ortho = (world_to_camera.transpose() * world_to_camera - Mat3::Identity())
                           .cwiseAbs()
                           .maxCoeff();
  if (!(ortho <= kOrthonormalTol)) throw ValidationError("rotation matrix is not orthonormal");
  if (std::abs(world_to_camera.determinant() - 1.0) > kOrthonormalTol) {
    throw ValidationError("rotation matrix is a reflection");
  }
  Quat q(world_to_camera);
  q.normalize();
  return CameraPose(position, q, timestamp);
}

Trajectory::Trajectory(std::vector<CameraPose> poses, double frame_rate, std::string clip_id)
    : poses_(std::move(poses)), frame_rate_(frame_rate), clip_id_(std::move(clip_id)) {
  if (poses_.size() < 2) throw DegenerateError("trajectory needs at least 2 poses");
  if (!(frame_rate_ > 0.0) || !std::isfinite(frame_rate_)) {
    throw ValidationError("frame_rate must be positive");
  }
  for (std::size_t i = 1; i < poses_.size(); ++i) {
    if (!(poses_[i].timestamp() > poses_[i - 1].timestamp())) {
      throw ValidationError("timestamps must be strictly increasing at frame " + std::to_string(i));
    }
  }
}

RelativePose relative_pose(const CameraPose& a, const CameraPose& b) {
  const Mat3 ra = a.rotation();
  const Mat3 rb = b.rotation();
  return {ra * (b.position() - a.position()), rb * ra.transpose()};
}

Mat3 euler_compose(const EulerAngles& e) {
  if (e.convention.handedness == Handedness::kLeft) {
    return rot_z(e.yaw) * rot_y(-e.pitch) * rot_x(-e.roll);
  }
  return rot_z(e.yaw) * rot_y(e.pitch) * rot_x(e.roll);
}

EulerAngles euler_decompose(const Mat3& m, EulerConvention convention) {
  if (!(m.determinant() > 0.0)) throw ValidationError("rotation has non-positive determinant");

  // Standard ZYX angles of m = Rz(yaw) Ry(pitch) Rx(roll).
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  const double c = std::hypot(m(2, 1), m(2, 2));
  if (c < kGimbalEps) {
    pitch = m(2, 0) < 0.0 ? std::numbers::pi / 2 : -std::numbers::pi / 2;
    yaw = std::atan2(-m(0, 1), m(1, 1));
  } else {
    pitch = std::atan2(-m(2, 0), c);
    roll = std::atan2(m(2, 1), m(2, 2));
    // Solve yaw from the residual so errors in roll near the singularity are
    // absorbed instead of amplified.
    const Mat3 residual = m * (rot_y(pitch) * rot_x(roll)).transpose();
    yaw = std::atan2(residual(1, 0), residual(0, 0));
  }

  EulerAngles out;
  out.convention = convention;
  out.yaw = wrap_half_open(yaw);
  if (convention.handedness == Handedness::kLeft) {
    out.pitch = -pitch;
    out.roll = wrap_half_open(-roll);
  } else {
    out.pitch = pitch;
    out.roll = wrap_half_open(roll);
  }
  if (out.roll == 0.0) out.roll = 0.0;  // drop -0
  if (out.pitch == 0.0) out.pitch = 0.0;
  return out;
}

double rotation_angle(const Mat3& r) {
  const double s = 0.5 * Vec3(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1)).norm();
  const double c = 0.5 * (r.trace() - 1.0);
  return std::atan2(s, c);
}

double mean_displacement(const Trajectory& traj) {
  // Running mean: equal magnitudes give back exactly that magnitude.
  double mean = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
    const double d = relative_pose(traj[i], traj[i + 1]).translation.norm();
    if (d > 0.0) {
      ++count;
      mean += (d - mean) / static_cast<double>(count);
    }
  }
  return mean;
}

}  // namespace relicforge
