// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/action_codec.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

#include "relicforge/error.hpp"

namespace relicforge {

namespace {

constexpr std::array<std::string_view, kActionDims> kNames = {
    "dolly_in",   "dolly_out",  "truck_left", "truck_right", "pedestal_up",
    "pedestal_down", "tilt_up", "tilt_down",  "pan_left",    "pan_right",
    "roll_cw",    "roll_ccw",   "static"};

constexpr std::size_t idx(Action a) { return static_cast<std::size_t>(a); }

// Positive value goes to `pos`, negative magnitude to `neg`.
void route(std::array<double, kActionDims>& slots, double v, Action pos, Action neg) {
  if (v > 0.0) {
    slots[idx(pos)] = v;
  } else if (v < 0.0) {
    slots[idx(neg)] = -v;
  }
}

}  // namespace

std::string_view action_name(Action a) { return kNames[idx(a)]; }

std::optional<Action> action_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kActionDims; ++i) {
    if (kNames[i] == name) return static_cast<Action>(i);
  }
  return std::nullopt;
}

std::optional<Action> opposite(Action a) {
  if (a == Action::kStatic) return std::nullopt;
  const std::size_t i = idx(a);
  return static_cast<Action>(i % 2 == 0 ? i + 1 : i - 1);
}

ActionVector::ActionVector(const std::array<double, kActionDims>& slots) : slots_(slots) {
  for (std::size_t i = 0; i < kActionDims; ++i) {
    if (!std::isfinite(slots_[i]) || slots_[i] < 0.0) {
      throw ValidationError(std::string("slot ") + std::string(kNames[i]) + " must be finite and >= 0");
    }
  }
  for (std::size_t i = 0; i + 1 < kActionDims; i += 2) {
    if (slots_[i] != 0.0 && slots_[i + 1] != 0.0) {
      throw ValidationError("opposing slots " + std::string(kNames[i]) + "/" +
                            std::string(kNames[i + 1]) + " both active");
    }
  }
  bool any_motion = false;
  for (std::size_t i = 0; i + 1 < kActionDims; ++i) any_motion = any_motion || slots_[i] != 0.0;
  const double st = slots_[idx(Action::kStatic)];
  if (st != 0.0 && st != 1.0) throw ValidationError("static flag must be 0 or 1");
  if (st == 1.0 && any_motion) throw ValidationError("static frame carries motion");
  if (st == 0.0 && !any_motion) throw ValidationError("non-static frame carries no motion");
}

ActionVector ActionVector::make_static() {
  std::array<double, kActionDims> s{};
  s[idx(Action::kStatic)] = 1.0;
  return ActionVector(s);
}

ActionVector ActionVector::from_motion(const SignedMotion& m) {
  std::array<double, kActionDims> s{};
  route(s, m.forward, Action::kDollyIn, Action::kDollyOut);
  route(s, m.right, Action::kTruckRight, Action::kTruckLeft);
  route(s, m.up, Action::kPedestalUp, Action::kPedestalDown);
  route(s, m.pitch, Action::kTiltUp, Action::kTiltDown);
  route(s, m.yaw, Action::kPanRight, Action::kPanLeft);
  route(s, m.roll, Action::kRollCw, Action::kRollCcw);
  bool any = false;
  for (std::size_t i = 0; i + 1 < kActionDims; ++i) any = any || s[i] != 0.0;
  if (!any) s[idx(Action::kStatic)] = 1.0;
  return ActionVector(s);
}

SignedMotion ActionVector::motion() const {
  const auto& s = slots_;
  SignedMotion m;
  m.forward = s[idx(Action::kDollyIn)] - s[idx(Action::kDollyOut)];
  m.right = s[idx(Action::kTruckRight)] - s[idx(Action::kTruckLeft)];
  m.up = s[idx(Action::kPedestalUp)] - s[idx(Action::kPedestalDown)];
  m.pitch = s[idx(Action::kTiltUp)] - s[idx(Action::kTiltDown)];
  m.yaw = s[idx(Action::kPanRight)] - s[idx(Action::kPanLeft)];
  m.roll = s[idx(Action::kRollCw)] - s[idx(Action::kRollCcw)];
  return m;
}

ActionSequence extract_actions(const Trajectory& traj, const StaticThresholds& thresholds) {
  if (!(thresholds.translation > 0.0) || !(thresholds.rotation > 0.0)) {
    throw ValidationError("static thresholds must be positive");
  }
  ActionSequence seq;
  seq.source_frame_rate = traj.frame_rate();
  const double mean = mean_displacement(traj);
  seq.mean_displacement = mean > 0.0 ? mean : 1.0;

  seq.actions.reserve(traj.size());
  seq.actions.push_back(ActionVector::make_static());
  const EulerConvention ue{Handedness::kLeft};
  bool all_static = true;
  for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
    const RelativePose rel = relative_pose(traj[t], traj[t + 1]);
    const Vec3 d = rel.translation / seq.mean_displacement;
    // Angles of the camera's own motion, i.e. the orientation of frame t+1
    // seen from frame t: a rightward turn is a positive yaw.
    const EulerAngles e = euler_decompose(rel.rotation.transpose(), ue);

    const bool below = std::abs(d.x()) < thresholds.translation &&
                       std::abs(d.y()) < thresholds.translation &&
                       std::abs(d.z()) < thresholds.translation &&
                       std::abs(e.yaw) < thresholds.rotation &&
                       std::abs(e.pitch) < thresholds.rotation &&
                       std::abs(e.roll) < thresholds.rotation;
    if (below) {
      seq.actions.push_back(ActionVector::make_static());
      continue;
    }
    const ActionVector v = ActionVector::from_motion({d.x(), d.y(), d.z(), e.yaw, e.pitch, e.roll});
    all_static = all_static && v.is_static();
    seq.actions.push_back(v);
  }
  seq.degenerate = mean == 0.0 && all_static;
  return seq;
}

Trajectory integrate_poses(const ActionSequence& seq, double gamma, const CameraPose& initial) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (seq.actions.size() < 2) throw ValidationError("action sequence needs at least 2 frames");
  if (!(seq.source_frame_rate > 0.0)) throw ValidationError("frame rate must be positive");

  std::vector<CameraPose> poses;
  poses.reserve(seq.actions.size());
  poses.push_back(initial);
  const double dt = 1.0 / seq.source_frame_rate;
  for (std::size_t t = 1; t < seq.actions.size(); ++t) {
    // Re-validate: sequences may be assembled by hand.
    const ActionVector v(seq.actions[t].slots());
    const CameraPose& prev = poses.back();
    const double stamp = initial.timestamp() + static_cast<double>(t) * dt;
    if (v.is_static()) {
      poses.emplace_back(prev.position(), prev.quaternion(), stamp);
      continue;
    }
    const SignedMotion m = v.motion();
    const Mat3 r = prev.rotation();
    const Mat3 delta = euler_compose({m.yaw, m.pitch, m.roll, {Handedness::kLeft}}).transpose();
    const Vec3 p = prev.position() + r.transpose() * (gamma * Vec3(m.forward, m.right, m.up));
    Quat q(Mat3(delta * r));
    q.normalize();
    poses.emplace_back(p, q, stamp);
  }
  return Trajectory(std::move(poses), seq.source_frame_rate);
}

ActionVector multihot_from_keys(const std::set<Action>& pressed, double gamma,
                                const KeyConfig& config) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  std::array<double, kActionDims> s{};
  for (const Action a : pressed) {
    if (a == Action::kStatic) continue;
    if (const auto o = opposite(a); o && pressed.contains(*o)) {
      throw ContractError("conflicting keys: " + std::string(action_name(a)) + " and " +
                          std::string(action_name(*o)));
    }
    s[idx(a)] = idx(a) < idx(Action::kTiltUp) ? gamma : config.angular_step;
  }
  bool any = false;
  for (std::size_t i = 0; i + 1 < kActionDims; ++i) any = any || s[i] != 0.0;
  if (!any) s[idx(Action::kStatic)] = 1.0;
  return ActionVector(s);
}

std::string serialize_actions(const ActionSequence& seq, double gamma) {
  using nlohmann::json;
  std::ostringstream out;
  out << json{{"mean_displacement", seq.mean_displacement},
              {"gamma", gamma},
              {"source_frame_rate", seq.source_frame_rate},
              {"degenerate", seq.degenerate}}
             .dump()
      << '\n';
  for (std::size_t i = 0; i < seq.actions.size(); ++i) {
    const auto& v = seq.actions[i];
    out << json{{"frame", i}, {"a", v.slots()}, {"static", v.is_static()}}.dump() << '\n';
  }
  return out.str();
}

ActionFile parse_actions(std::string_view text) {
  using nlohmann::json;
  ActionFile file;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t record = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& err) {
      throw ParseError(record, err.what());
    }
    if (header) {
      if (!j.contains("mean_displacement") || !j.contains("source_frame_rate")) {
        throw ParseError(record, "header needs mean_displacement and source_frame_rate");
      }
      file.sequence.mean_displacement = j.at("mean_displacement").get<double>();
      file.sequence.source_frame_rate = j.at("source_frame_rate").get<double>();
      file.sequence.degenerate = j.value("degenerate", false);
      file.gamma = j.value("gamma", file.sequence.mean_displacement);
      header = false;
    } else {
      const auto a = j.find("a");
      if (a == j.end() || !a->is_array() || a->size() != kActionDims) {
        throw ParseError(record, "'a' must hold 13 numbers");
      }
      std::array<double, kActionDims> s{};
      for (std::size_t i = 0; i < kActionDims; ++i) {
        if (!(*a)[i].is_number()) throw ParseError(record, "non-numeric action slot");
        s[i] = (*a)[i].get<double>();
      }
      try {
        file.sequence.actions.emplace_back(s);
      } catch (const ValidationError& err) {
        throw ValidationError("record " + std::to_string(record) + ": " + err.what());
      }
    }
    ++record;
  }
  if (header) throw ParseError(0, "empty action file");
  if (!(file.sequence.mean_displacement > 0.0)) throw ValidationError("mean_displacement must be positive");
  if (file.sequence.actions.size() < 2) throw ValidationError("action file needs at least 2 frames");
  return file;
}

}  // namespace relicforge
