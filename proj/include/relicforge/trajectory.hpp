// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <string>
#include <string_view>
#include <vector>

namespace relicforge {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Quat = Eigen::Quaterniond;

/// Timestamped 6-DoF camera pose. `rotation` maps world coordinates into the
/// camera frame (x forward, y right, z up).
class CameraPose {
 public:
  CameraPose() = default;
  /// Validates and stores; a quaternion whose norm is off by more than 1e-6
  /// raises ValidationError, smaller deviations are renormalized.
  CameraPose(const Vec3& position, const Quat& world_to_camera, double timestamp);

  static CameraPose from_matrix(const Vec3& position, const Mat3& world_to_camera,
                                double timestamp);

  const Vec3& position() const noexcept { return position_; }
  const Quat& quaternion() const noexcept { return rotation_; }
  Mat3 rotation() const { return rotation_.toRotationMatrix(); }
  double timestamp() const noexcept { return timestamp_; }

 private:
  Vec3 position_ = Vec3::Zero();
  Quat rotation_ = Quat::Identity();
  double timestamp_ = 0.0;
};

/// Ordered, frame-aligned camera poses of one clip. At least two poses with
/// strictly increasing timestamps and a positive frame rate.
class Trajectory {
 public:
  Trajectory(std::vector<CameraPose> poses, double frame_rate, std::string clip_id = {});

  const std::vector<CameraPose>& poses() const noexcept { return poses_; }
  const CameraPose& operator[](std::size_t i) const { return poses_[i]; }
  std::size_t size() const noexcept { return poses_.size(); }
  double frame_rate() const noexcept { return frame_rate_; }
  const std::string& clip_id() const noexcept { return clip_id_; }

 private:
  std::vector<CameraPose> poses_;
  double frame_rate_;
  std::string clip_id_;
};

enum class Handedness {
  kLeft,   // game-engine: positive pitch looks up, matches Rz(yaw) Ry(-pitch) Rx(-roll)
  kRight,  // aerospace ZYX: Rz(yaw) Ry(pitch) Rx(roll)
};

/// Intrinsic yaw (about z) -> pitch (about y) -> roll (about x).
struct EulerConvention {
  Handedness handedness = Handedness::kLeft;
  bool operator==(const EulerConvention&) const = default;
};

struct EulerAngles {
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
  EulerConvention convention{};
};

struct RelativePose {
  Vec3 translation;  // displacement expressed in the frame of the first pose
  Mat3 rotation;     // R_b * R_a^T
};

/// Camera-frame displacement and rotation between consecutive poses.
RelativePose relative_pose(const CameraPose& a, const CameraPose& b);

/// Decomposes an orthonormal matrix. At |pitch| = pi/2 roll is fixed to zero
/// and all residual rotation goes to yaw. Throws ValidationError on det <= 0.
EulerAngles euler_decompose(const Mat3& r, EulerConvention convention = {});
Mat3 euler_compose(const EulerAngles& angles);

/// Rotation angle of an orthonormal matrix in [0, pi].
double rotation_angle(const Mat3& r);

/// Mean magnitude of the nonzero per-frame displacements, or 0 when the clip
/// never moves.
double mean_displacement(const Trajectory& traj);

// Annotation documents: {"frame_rate": f, "clip_id"?: s, "frames": [
//   {"t": s, "position": [x,y,z], "rotation": {"quat": [w,x,y,z]}
//                                     | {"yaw": d, "pitch": d, "roll": d}}]}
// Quaternions are world-to-camera; yaw/pitch/roll (degrees) describe the
// camera's orientation in the world and are transposed on load.

Trajectory parse_annotation(std::string_view document,
                            EulerConvention convention = {});
std::string serialize_annotation(const Trajectory& traj);

Trajectory load_annotation(const std::string& path, EulerConvention convention = {});
void save_annotation(const std::string& path, const Trajectory& traj);

}  // namespace relicforge
