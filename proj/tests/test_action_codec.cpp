// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relicforge/action_codec.hpp"
#include "relicforge/error.hpp"
#include "support/synthetic.hpp"

using namespace relicforge;
using namespace relicforge::testing;

namespace {

constexpr double kPi = std::numbers::pi;

double pose_error(const Trajectory& a, const Trajectory& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (a[i].position() - b[i].position()).cwiseAbs().maxCoeff());
    worst = std::max(worst, (a[i].rotation() - b[i].rotation()).cwiseAbs().maxCoeff());
  }
  return worst;
}

void check_vector_invariants(const ActionVector& v) {
  const auto& s = v.slots();
  for (const double x : s) CHECK(x >= 0.0);
  for (std::size_t i = 0; i + 1 < kActionDims; i += 2) CHECK((s[i] == 0.0 || s[i + 1] == 0.0));
  bool motion = false;
  for (std::size_t i = 0; i + 1 < kActionDims; ++i) motion = motion || s[i] != 0.0;
  CHECK(motion != v.is_static());
}

Trajectory forward_and_turn(std::size_t frames, double total_yaw) {
  std::vector<CameraPose> poses;
  Vec3 p = Vec3::Zero();
  for (std::size_t t = 0; t < frames; ++t) {
    const double yaw = total_yaw * static_cast<double>(t) / static_cast<double>(frames - 1);
    const Mat3 cam_to_world = engine_orientation(yaw, 0.0, 0.0);
    poses.push_back(CameraPose::from_matrix(p, cam_to_world.transpose(), t / 16.0));
    p += cam_to_world * Vec3(0.8, 0.0, 0.0);
  }
  return Trajectory(std::move(poses), 16.0);
}

}  // namespace

TEST_CASE("extract_actions: constant pose is all static with fallback scale") {
  std::vector<CameraPose> poses;
  for (int t = 0; t < 10; ++t) poses.emplace_back(Vec3(1, 2, 3), Quat::Identity(), t / 16.0);
  const ActionSequence seq = extract_actions(Trajectory(poses, 16.0));
  CHECK(seq.actions.size() == 10);
  CHECK(seq.mean_displacement == 1.0);
  CHECK(seq.degenerate);
  for (const auto& a : seq.actions) CHECK(a.is_static());
}

TEST_CASE("extract_actions: uniform forward motion normalizes to exactly one") {
  const ActionSequence seq = extract_actions(straight_line(12, 2.5));
  CHECK(seq.mean_displacement == 2.5);
  CHECK(seq.actions.front().is_static());
  for (std::size_t t = 1; t < seq.actions.size(); ++t) {
    const auto& a = seq.actions[t];
    CHECK(a[Action::kDollyIn] == 1.0);
    for (std::size_t s = 1; s < kActionDims; ++s) CHECK(a.slots()[s] == 0.0);
  }
}

TEST_CASE("extract_actions routes signs to camera semantics") {
  // Step to the camera's right while turning right, pitching up and rolling.
  const Mat3 o0 = engine_orientation(0.2, 0.1, 0.0);
  const Mat3 o1 = o0 * engine_orientation(0.05, 0.03, 0.02);
  const Vec3 p0(1, 1, 1);
  const Vec3 p1 = p0 + o0 * Vec3(0.0, 1.0, -0.5);
  const Trajectory t({CameraPose::from_matrix(p0, o0.transpose(), 0.0),
                      CameraPose::from_matrix(p1, o1.transpose(), 0.1)},
                     10.0);
  const ActionVector a = extract_actions(t).actions[1];
  CHECK(a[Action::kTruckRight] > 0.0);
  CHECK(a[Action::kPedestalDown] > 0.0);
  CHECK(a[Action::kPanRight] == doctest::Approx(0.05).epsilon(1e-12));
  CHECK(a[Action::kTiltUp] == doctest::Approx(0.03).epsilon(1e-12));
  CHECK(a[Action::kRollCw] == doctest::Approx(0.02).epsilon(1e-12));
}

TEST_CASE("extract_actions: forward motion with a quarter turn round-trips") {
  const Trajectory src = forward_and_turn(30, kPi / 2);
  const ActionSequence seq = extract_actions(src);
  for (std::size_t t = 1; t < seq.actions.size(); ++t) CHECK(seq.actions[t][Action::kPanRight] > 0.0);
  const Trajectory back = integrate_poses(seq, seq.mean_displacement, src[0]);
  CHECK(pose_error(src, back) < 1e-9);
}

TEST_CASE("integrate_poses: static and straight-line cases") {
  const CameraPose initial(Vec3(1, -2, 3), Quat(Eigen::AngleAxisd(0.4, Vec3::UnitZ())), 0.0);
  ActionSequence still;
  still.actions.assign(6, ActionVector::make_static());
  still.source_frame_rate = 16.0;
  const Trajectory s = integrate_poses(still, 1.7, initial);
  for (const auto& p : s.poses()) {
    CHECK(p.position() == initial.position());
    CHECK(p.quaternion().coeffs() == initial.quaternion().coeffs());
  }

  const std::size_t n = 20;
  const double dbar = 0.75;
  ActionSequence fwd;
  fwd.mean_displacement = dbar;
  fwd.source_frame_rate = 16.0;
  fwd.actions.push_back(ActionVector::make_static());
  for (std::size_t i = 0; i < n; ++i) fwd.actions.push_back(ActionVector::from_motion({1.0, 0, 0, 0, 0, 0}));
  const Trajectory line = integrate_poses(fwd, dbar, CameraPose(Vec3::Zero(), Quat::Identity(), 0.0));
  CHECK(line[n].position() == Vec3(n * dbar, 0, 0));
  for (const auto& p : line.poses()) CHECK(p.quaternion().coeffs() == Quat::Identity().coeffs());
}

TEST_CASE("round trip over random smooth trajectories") {
  std::mt19937_64 rng(21);
  std::uniform_int_distribution<std::size_t> len(16, 128);
  for (int trial = 0; trial < 100; ++trial) {
    const Trajectory src = smooth_trajectory(rng, len(rng));
    const ActionSequence seq = extract_actions(src);
    CHECK_FALSE(seq.degenerate);
    for (const auto& a : seq.actions) check_vector_invariants(a);
    for (std::size_t t = 1; t < seq.actions.size(); ++t) CHECK_FALSE(seq.actions[t].is_static());
    const Trajectory back = integrate_poses(seq, seq.mean_displacement, src[0]);
    CHECK(pose_error(src, back) < 1e-9);
  }
}

TEST_CASE("extract_actions is invariant to uniform scaling") {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    const Trajectory src = smooth_trajectory(rng, 40);
    const double k = std::pow(10.0, std::uniform_real_distribution<double>(-3, 3)(rng));
    std::vector<CameraPose> scaled;
    for (const auto& p : src.poses()) scaled.emplace_back(k * p.position(), p.quaternion(), p.timestamp());
    const ActionSequence a = extract_actions(src);
    const ActionSequence b = extract_actions(Trajectory(scaled, src.frame_rate()));
    for (std::size_t t = 0; t < a.actions.size(); ++t) {
      for (std::size_t s = 0; s < kActionDims; ++s) {
        CHECK(std::abs(a.actions[t].slots()[s] - b.actions[t].slots()[s]) < 1e-12);
      }
    }
  }
}

TEST_CASE("small motions below the thresholds become static") {
  std::vector<CameraPose> poses;
  for (int t = 0; t < 5; ++t) poses.emplace_back(Vec3(t, 0, 0), Quat::Identity(), t);
  poses.emplace_back(Vec3(4.01, 0, 0), Quat::Identity(), 5);  // 0.01 of the mean step
  const ActionSequence seq = extract_actions(Trajectory(poses, 1.0));
  CHECK(seq.actions[5].is_static());
  CHECK_FALSE(seq.actions[4].is_static());
  CHECK_THROWS_AS(extract_actions(Trajectory(poses, 1.0), {0.0, 0.1}), ValidationError);
}

TEST_CASE("ActionVector rejects broken invariants") {
  std::array<double, kActionDims> both{};
  both[0] = 1.0;
  both[1] = 0.5;
  CHECK_THROWS_AS(ActionVector{both}, ValidationError);
  std::array<double, kActionDims> neg{};
  neg[3] = -1.0;
  CHECK_THROWS_AS(ActionVector{neg}, ValidationError);
  std::array<double, kActionDims> empty{};
  CHECK_THROWS_AS(ActionVector{empty}, ValidationError);
  std::array<double, kActionDims> noisy_static{};
  noisy_static[12] = 1.0;
  noisy_static[4] = 0.1;
  CHECK_THROWS_AS(ActionVector{noisy_static}, ValidationError);
  CHECK(ActionVector{}.is_static());
}

TEST_CASE("integrate_poses rejects a hand-built pair violation in an action file") {
  const std::string text =
      "{\"mean_displacement\":1,\"gamma\":1,\"source_frame_rate\":16}\n"
      "{\"frame\":0,\"a\":[0,0,0,0,0,0,0,0,0,0,0,0,1],\"static\":true}\n"
      "{\"frame\":1,\"a\":[1,1,0,0,0,0,0,0,0,0,0,0,0],\"static\":false}\n";
  CHECK_THROWS_AS(parse_actions(text), ValidationError);
  CHECK_THROWS_AS(integrate_poses(ActionSequence{}, 1.0, CameraPose{}), ValidationError);
}

TEST_CASE("multihot_from_keys") {
  CHECK(multihot_from_keys({}, 1.0).is_static());

  const KeyConfig cfg{};
  const ActionVector v = multihot_from_keys({Action::kDollyIn, Action::kPanLeft}, 1.0, cfg);
  CHECK(v[Action::kDollyIn] == 1.0);
  CHECK(v[Action::kPanLeft] == cfg.angular_step);
  CHECK_FALSE(v.is_static());

  try {
    multihot_from_keys({Action::kDollyIn, Action::kDollyOut}, 1.0);
    FAIL("expected a conflict");
  } catch (const ContractError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dolly_in") != std::string::npos);
    CHECK(msg.find("dolly_out") != std::string::npos);
  }
}

TEST_CASE("action files round trip") {
  std::mt19937_64 rng(8);
  const ActionSequence seq = extract_actions(smooth_trajectory(rng, 25));
  const ActionFile back = parse_actions(serialize_actions(seq, 2.0));
  CHECK(back.gamma == 2.0);
  CHECK(back.sequence.mean_displacement == seq.mean_displacement);
  CHECK(back.sequence.source_frame_rate == seq.source_frame_rate);
  REQUIRE(back.sequence.actions.size() == seq.actions.size());
  for (std::size_t i = 0; i < seq.actions.size(); ++i) CHECK(back.sequence.actions[i] == seq.actions[i]);
}

TEST_CASE("action names") {
  CHECK(action_name(Action::kRollCcw) == "roll_ccw");
  CHECK(action_from_name("pan_right") == Action::kPanRight);
  CHECK_FALSE(action_from_name("jump").has_value());
  CHECK(opposite(Action::kTiltDown) == Action::kTiltUp);
  CHECK_FALSE(opposite(Action::kStatic).has_value());
}
