// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>

#include "relicforge/trajectory.hpp"

namespace relicforge {

/// target ~ scale * rotation * source + translation
struct AlignmentResult {
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double residual_rms = 0.0;

  Vec3 apply(const Vec3& p) const { return scale * rotation * p + translation; }
};

/// Closed-form least-squares similarity (Umeyama). Needs at least three
/// non-collinear correspondences; throws DegenerateError otherwise.
AlignmentResult umeyama_sim3(std::span<const Vec3> source, std::span<const Vec3> target);

struct RpeReport {
  double rpe_trans = 0.0;  // RMSE of per-step translation error / reference mean step
  double rpe_rot = 0.0;    // mean per-step angular error, degrees
  AlignmentResult alignment;
};

/// Relative pose error at a one-frame step. With `align`, estimate positions
/// and orientations are first mapped through the Sim(3) fit of estimate
/// positions onto reference positions. Throws ShapeError on length mismatch.
RpeReport rpe(const Trajectory& reference, const Trajectory& estimate, bool align = true);

/// Applies a similarity transform to a whole trajectory (positions mapped,
/// camera orientations rotated with it).
Trajectory transform_trajectory(const Trajectory& traj, const AlignmentResult& sim);

}  // namespace relicforge
