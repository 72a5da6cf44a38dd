// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/traj_eval.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <numbers>

#include "relicforge/error.hpp"

namespace relicforge {

AlignmentResult umeyama_sim3(std::span<const Vec3> source, std::span<const Vec3> target) {
  if (source.size() != target.size()) throw ShapeError("point sets differ in size");
  if (source.size() < 3) throw DegenerateError("similarity alignment needs at least 3 points");
  const double n = static_cast<double>(source.size());

  Vec3 mu_s = Vec3::Zero();
  Vec3 mu_t = Vec3::Zero();
  for (std::size_t i = 0; i < source.size(); ++i) {
    mu_s += source[i];
    mu_t += target[i];
  }
  mu_s /= n;
  mu_t /= n;

  Mat3 cov = Mat3::Zero();
  Mat3 src_scatter = Mat3::Zero();
  double var_s = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) {
    const Vec3 ds = source[i] - mu_s;
    cov += (target[i] - mu_t) * ds.transpose();
    src_scatter += ds * ds.transpose();
    var_s += ds.squaredNorm();
  }
  cov /= n;
  var_s /= n;

  const Eigen::JacobiSVD<Mat3> src_svd(src_scatter);
  const Vec3 spread = src_svd.singularValues();
  if (!(spread[0] > 0.0) || spread[1] <= 1e-12 * spread[0]) {
    throw DegenerateError("source points are collinear or coincident");
  }

  const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 s = Mat3::Identity();
  if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

  AlignmentResult out;
  out.rotation = svd.matrixU() * s * svd.matrixV().transpose();
  out.scale = (svd.singularValues().asDiagonal() * s).trace() / var_s;
  if (!(out.scale > 0.0)) throw DegenerateError("target points are degenerate (non-positive scale)");
  out.translation = mu_t - out.scale * out.rotation * mu_s;

  double sq = 0.0;
  for (std::size_t i = 0; i < source.size(); ++i) sq += (out.apply(source[i]) - target[i]).squaredNorm();
  out.residual_rms = std::sqrt(sq / n);
  return out;
}

Trajectory transform_trajectory(const Trajectory& traj, const AlignmentResult& sim) {
  std::vector<CameraPose> poses;
  poses.reserve(traj.size());
  for (const auto& p : traj.poses()) {
    // Camera-to-world turns with the world: R_wc' = R R_wc, so R' = R_t R^T.
    poses.push_back(CameraPose::from_matrix(sim.apply(p.position()),
                                            p.rotation() * sim.rotation.transpose(), p.timestamp()));
  }
  return Trajectory(std::move(poses), traj.frame_rate(), traj.clip_id());
}

RpeReport rpe(const Trajectory& reference, const Trajectory& estimate, bool align) {
  if (reference.size() != estimate.size()) throw ShapeError("trajectories differ in length");

  RpeReport report;
  const Trajectory* est = &estimate;
  Trajectory aligned = estimate;
  if (align) {
    std::vector<Vec3> src;
    std::vector<Vec3> dst;
    for (std::size_t i = 0; i < reference.size(); ++i) {
      src.push_back(estimate[i].position());
      dst.push_back(reference[i].position());
    }
    report.alignment = umeyama_sim3(src, dst);
    aligned = transform_trajectory(estimate, report.alignment);
    est = &aligned;
  }

  const double step = mean_displacement(reference);
  const double norm = step > 0.0 ? step : 1.0;
  double sq = 0.0;
  double angle = 0.0;
  const std::size_t pairs = reference.size() - 1;
  for (std::size_t t = 0; t < pairs; ++t) {
    const RelativePose r = relative_pose(reference[t], reference[t + 1]);
    const RelativePose e = relative_pose((*est)[t], (*est)[t + 1]);
    // Relative motion in the camera frame is (R_t R_{t+1}^T, R_t dP); the
    // stored rotation is its transpose.
    const Mat3 rot_r = r.rotation.transpose();
    const Mat3 rot_e = e.rotation.transpose();
    const Mat3 err_rot = rot_r.transpose() * rot_e;
    const Vec3 err_trans = rot_r.transpose() * (e.translation - r.translation);
    sq += err_trans.squaredNorm();
    angle += rotation_angle(err_rot);
  }
  report.rpe_trans = std::sqrt(sq / static_cast<double>(pairs)) / norm;
  report.rpe_rot = angle / static_cast<double>(pairs) * 180.0 / std::numbers::pi;
  return report;
}

}  // namespace relicforge
