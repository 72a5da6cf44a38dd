// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

// Test-only oracles. Nothing here calls into the code paths it is used to
// check, except for constructing the value types.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <random>
#include <vector>

#include "relicforge/trajectory.hpp"

namespace relicforge::testing {

using M3 = std::array<std::array<double, 3>, 3>;

/// Quaternion (w, x, y, z) to matrix with the textbook formula.
inline M3 quat_to_m3(double w, double x, double y, double z) {
  return {{{1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)},
           {2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)},
           {2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)}}};
}

inline M3 m3_mul(const M3& a, const M3& b) {
  M3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      for (int k = 0; k < 3; ++k) c[i][j] += a[i][k] * b[k][j];
  return c;
}

inline M3 m3_transpose(const M3& a) {
  M3 t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = a[j][i];
  return t;
}

inline std::array<double, 3> m3_apply(const M3& a, const std::array<double, 3>& v) {
  std::array<double, 3> r{};
  for (int i = 0; i < 3; ++i)
    for (int k = 0; k < 3; ++k) r[i] += a[i][k] * v[k];
  return r;
}

inline M3 pose_m3(const CameraPose& p) {
  const auto& q = p.quaternion();
  return quat_to_m3(q.w(), q.x(), q.y(), q.z());
}

/// Elementary rotations written out by hand.
inline Mat3 hand_rz(double a) {
  Mat3 m;
  m << std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1;
  return m;
}
inline Mat3 hand_ry(double a) {
  Mat3 m;
  m << std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a);
  return m;
}
inline Mat3 hand_rx(double a) {
  Mat3 m;
  m << 1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a);
  return m;
}

/// Camera-to-world orientation for game-engine (left-handed) angles.
inline Mat3 engine_orientation(double yaw, double pitch, double roll) {
  return hand_rz(yaw) * hand_ry(-pitch) * hand_rx(-roll);
}

inline Mat3 random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Quat q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Smooth random camera path: orientation angles are sums of low-frequency
/// sinusoids, the camera always moves forward at 0.5..1.5 of its nominal
/// step with smooth lateral/vertical drift, and the whole clip is scaled by
/// a random scene scale.
inline Trajectory smooth_trajectory(std::mt19937_64& rng, std::size_t frames,
                                    double frame_rate = 16.0) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double two_pi = 2.0 * std::numbers::pi;
  auto wave = [&](double amp) {
    std::array<double, 6> c{};
    for (int i = 0; i < 3; ++i) {
      c[2 * i] = amp * (uni(rng) - 0.5);
      c[2 * i + 1] = two_pi * uni(rng);
    }
    return c;
  };
  const auto yaw_w = wave(6.0), pitch_w = wave(1.2), roll_w = wave(0.8);
  const auto fwd_w = wave(0.6), side_w = wave(0.8), up_w = wave(0.8);
  auto eval = [&](const std::array<double, 6>& c, double s) {
    double v = 0.0;
    for (int i = 0; i < 3; ++i) v += c[2 * i] * std::sin((i + 1) * two_pi * s + c[2 * i + 1]);
    return v;
  };
  const double scale = std::exp(std::log(0.1) + uni(rng) * std::log(100.0));
  const double step = scale * (0.5 + uni(rng));
  std::vector<CameraPose> poses;
  poses.reserve(frames);
  Vec3 position(scale * (uni(rng) - 0.5), scale * (uni(rng) - 0.5), scale * (uni(rng) - 0.5));
  for (std::size_t t = 0; t < frames; ++t) {
    const double s = static_cast<double>(t) / static_cast<double>(frames);
    const double pitch = std::clamp(eval(pitch_w, s), -1.2, 1.2);
    const Mat3 cam_to_world = engine_orientation(eval(yaw_w, s), pitch, eval(roll_w, s));
    poses.push_back(CameraPose::from_matrix(position, cam_to_world.transpose(),
                                            static_cast<double>(t) / frame_rate));
    const double fwd = 1.0 + std::clamp(eval(fwd_w, s), -0.5, 0.5);
    const Vec3 local(fwd, eval(side_w, s), eval(up_w, s));
    position += cam_to_world * (step * local);
  }
  return Trajectory(std::move(poses), frame_rate, "synthetic");
}

/// Straight line along +x with identity orientation.
inline Trajectory straight_line(std::size_t frames, double step, double frame_rate = 16.0) {
  std::vector<CameraPose> poses;
  for (std::size_t t = 0; t < frames; ++t) {
    poses.emplace_back(Vec3(step * static_cast<double>(t), 0, 0), Quat::Identity(),
                       static_cast<double>(t) / frame_rate);
  }
  return Trajectory(std::move(poses), frame_rate);
}

}  // namespace relicforge::testing
