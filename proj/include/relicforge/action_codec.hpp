// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "relicforge/trajectory.hpp"

namespace relicforge {

enum class Action : std::size_t {
  kDollyIn,
  kDollyOut,
  kTruckLeft,
  kTruckRight,
  kPedestalUp,
  kPedestalDown,
  kTiltUp,
  kTiltDown,
  kPanLeft,
  kPanRight,
  kRollCw,
  kRollCcw,
  kStatic,
};

inline constexpr std::size_t kActionDims = 13;

std::string_view action_name(Action a);
std::optional<Action> action_from_name(std::string_view name);
/// The other member of an opposing pair; kStatic has none.
std::optional<Action> opposite(Action a);

/// Signed motion of one frame: translation in units of the clip's mean
/// displacement, rotation as left-handed Euler increments in radians.
struct SignedMotion {
  double forward = 0.0;
  double right = 0.0;
  double up = 0.0;
  double yaw = 0.0;
  double pitch = 0.0;
  double roll = 0.0;
};

/// 13-slot non-negative action label. Opposing slots are mutually exclusive
/// and `static` excludes everything else.
class ActionVector {
 public:
  /// Static.
  ActionVector() = default;
  /// Throws ValidationError if the slots break an invariant.
  explicit ActionVector(const std::array<double, kActionDims>& slots);

  static ActionVector make_static();
  static ActionVector from_motion(const SignedMotion& m);

  double operator[](Action a) const { return slots_[static_cast<std::size_t>(a)]; }
  const std::array<double, kActionDims>& slots() const noexcept { return slots_; }
  bool is_static() const noexcept { return slots_[12] == 1.0; }
  SignedMotion motion() const;

  bool operator==(const ActionVector&) const = default;

 private:
  std::array<double, kActionDims> slots_{0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 1};
};

struct StaticThresholds {
  double translation = 0.05;          // normalized units
  double rotation = 0.1 * std::numbers::pi / 180.0;  // radians per frame
};

struct ActionSequence {
  std::vector<ActionVector> actions;  // actions[0] is the prepended static frame
  double mean_displacement = 1.0;
  double source_frame_rate = 1.0;
  bool degenerate = false;            // no motion anywhere; mean_displacement fell back to 1
};

/// Per-frame action labels for a trajectory. A frame whose normalized
/// translation and Euler increments all fall below the thresholds is static;
/// any other frame keeps its full signed motion.
ActionSequence extract_actions(const Trajectory& traj, const StaticThresholds& thresholds = {});

/// Inverse of extract_actions: integrates relative motion from `initial`,
/// scaling translations by `gamma` scene units per normalized unit.
Trajectory integrate_poses(const ActionSequence& seq, double gamma, const CameraPose& initial);

struct KeyConfig {
  double angular_step = 2.0 * std::numbers::pi / 180.0;  // radians per frame
};

/// Keyboard-style multi-hot vector. Translational keys get magnitude `gamma`,
/// rotational keys the configured angular step. Throws ContractError naming
/// the pair when both members of an opposing pair are pressed.
ActionVector multihot_from_keys(const std::set<Action>& pressed, double gamma,
                                const KeyConfig& config = {});

// Line-delimited action files: a header line
//   {"mean_displacement": d, "gamma": g, "source_frame_rate": f, "degenerate": b}
// followed by one {"frame": i, "a": [13 numbers], "static": b} line per frame.
std::string serialize_actions(const ActionSequence& seq, double gamma);
struct ActionFile {
  ActionSequence sequence;
  double gamma = 1.0;
};
ActionFile parse_actions(std::string_view text);

}  // namespace relicforge
