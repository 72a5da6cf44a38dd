// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "relicforge/action_codec.hpp"
#include "relicforge/trajectory.hpp"

namespace relicforge {

struct CaptionSegment {
  double start = 0.0;  // seconds
  std::string text;
};

struct ClipMetadata {
  std::string clip_id;
  double duration = 0.0;
  std::array<std::uint64_t, kActionDims> action_histogram{};
  double jitter_score = 0.0;
  double velocity_cv = 0.0;
  std::vector<CaptionSegment> caption_segments;

  void validate() const;
};

/// Motion-quality scores. Filtering thresholds are left to the caller.
struct FilterScores {
  double jitter_score = 0.0;       // RMS second difference of position / mean displacement
  double velocity_cv = 0.0;        // stddev / mean of nonzero step lengths
  double max_angular_speed = 0.0;  // rad/s
  bool degenerate = false;         // clip never moves
};

FilterScores filter_scores(const Trajectory& traj);

/// Metadata for one clip: per-slot count of frames with the slot active.
ClipMetadata clip_metadata(const Trajectory& traj, const ActionSequence& actions,
                           std::vector<CaptionSegment> captions = {});

/// Palindrome index sequence (1-based) for pivot t*: 1..t*, then t*-1 down
/// to 2t*-T. The pivot appears once and the length is exactly T. Throws
/// RangeError unless T >= 4 and floor(T/2) < t* <= T.
std::vector<std::size_t> palindrome_indices(std::size_t length, std::size_t pivot);

struct Augmentation {
  std::size_t pivot = 0;
  std::vector<std::size_t> indices;
};

/// Samples t* uniformly from floor(T/2)+1 .. T, the pivots whose mirrored
/// tail stays inside the clip.
Augmentation time_reverse_augment(std::size_t length, std::uint64_t seed);

struct BalanceResult {
  std::vector<std::size_t> selected;  // indices into the input, ascending
  std::array<double, kActionDims> achieved{};
  double l1_distance = 0.0;
};

/// Normalized histogram of a set of clips.
std::array<double, kActionDims> action_distribution(const std::vector<ClipMetadata>& clips,
                                                    const std::vector<std::size_t>& subset);
double l1_to_target(const std::array<double, kActionDims>& dist,
                    const std::array<double, kActionDims>& target);

/// Greedy backward elimination: starting from the whole pool, repeatedly drop
/// the clip whose removal lowers the L1 distance between the pooled action
/// distribution and `target` the most, until no removal helps. Ties are
/// broken by a seed-dependent clip order.
BalanceResult balance_sample(const std::vector<ClipMetadata>& clips,
                             const std::array<double, kActionDims>& target, std::uint64_t seed);

inline constexpr double kCaptionSegmentSeconds = 5.0;

/// Caption of the segment containing `sample_start`. Throws RangeError if the
/// start lies outside [0, last segment start + segment length).
const std::string& select_caption(const std::vector<CaptionSegment>& segments, double sample_start,
                                  double segment_seconds = kCaptionSegmentSeconds);

// Manifest lines: {"clip_id": s, "duration": d, "action_histogram": [13],
//   "jitter_score": j, "velocity_cv": v, "caption_segments": [{"start": s, "text": t}]}
std::string serialize_clip(const ClipMetadata& clip);
ClipMetadata parse_clip(std::string_view line, std::size_t record = 0);
std::vector<ClipMetadata> parse_manifest(std::string_view text);

struct HistogramBin {
  std::string bin;
  std::uint64_t count = 0;
};
std::vector<HistogramBin> action_histogram_table(const std::vector<ClipMetadata>& clips);
/// Duration histogram with bins [k*width, (k+1)*width).
std::vector<HistogramBin> duration_histogram_table(const std::vector<ClipMetadata>& clips,
                                                   double bin_seconds);

}  // namespace relicforge
