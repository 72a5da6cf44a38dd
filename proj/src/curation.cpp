// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/curation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "relicforge/error.hpp"

namespace relicforge {

void ClipMetadata::validate() const {
  if (!(duration > 0.0) || !std::isfinite(duration)) throw ValidationError("clip duration must be positive");
  if (!(velocity_cv >= 0.0)) throw ValidationError("velocity_cv must be non-negative");
  if (!(jitter_score >= 0.0)) throw ValidationError("jitter_score must be non-negative");
}

FilterScores filter_scores(const Trajectory& traj) {
  FilterScores out;
  const std::size_t n = traj.size();
  std::vector<double> steps;
  double max_angle = 0.0;
  for (std::size_t t = 0; t + 1 < n; ++t) {
    const RelativePose rel = relative_pose(traj[t], traj[t + 1]);
    const double d = rel.translation.norm();
    if (d > 0.0) steps.push_back(d);
    max_angle = std::max(max_angle, rotation_angle(rel.rotation));
  }
  out.max_angular_speed = max_angle * traj.frame_rate();
  if (steps.empty()) {
    out.degenerate = max_angle == 0.0;
    return out;
  }

  const double mean = std::accumulate(steps.begin(), steps.end(), 0.0) / static_cast<double>(steps.size());
  double var = 0.0;
  for (const double d : steps) var += (d - mean) * (d - mean);
  var /= static_cast<double>(steps.size());
  out.velocity_cv = std::sqrt(var) / mean;

  if (n >= 3) {
    double sq = 0.0;
    for (std::size_t t = 1; t + 1 < n; ++t) {
      const Vec3 acc = traj[t + 1].position() - 2.0 * traj[t].position() + traj[t - 1].position();
      sq += acc.squaredNorm();
    }
    out.jitter_score = std::sqrt(sq / static_cast<double>(n - 2)) / mean_displacement(traj);
  }
  return out;
}

ClipMetadata clip_metadata(const Trajectory& traj, const ActionSequence& actions,
                           std::vector<CaptionSegment> captions) {
  ClipMetadata m;
  m.clip_id = traj.clip_id();
  m.duration = static_cast<double>(traj.size()) / traj.frame_rate();
  for (const auto& a : actions.actions) {
    for (std::size_t s = 0; s < kActionDims; ++s) {
      if (a.slots()[s] != 0.0) ++m.action_histogram[s];
    }
  }
  const FilterScores scores = filter_scores(traj);
  m.jitter_score = scores.jitter_score;
  m.velocity_cv = scores.velocity_cv;
  m.caption_segments = std::move(captions);
  return m;
}

std::vector<std::size_t> palindrome_indices(std::size_t length, std::size_t pivot) {
  if (length < 4) throw RangeError("clip too short for time-reverse augmentation (need T >= 4)");
  if (pivot <= length / 2 || pivot > length) {
    throw RangeError("pivot " + std::to_string(pivot) + " outside (" + std::to_string(length / 2) +
                     ", " + std::to_string(length) + "]");
  }
  std::vector<std::size_t> out;
  out.reserve(length);
  for (std::size_t i = 1; i <= pivot; ++i) out.push_back(i);
  for (std::size_t i = pivot - 1; out.size() < length; --i) out.push_back(i);
  return out;
}

Augmentation time_reverse_augment(std::size_t length, std::uint64_t seed) {
  if (length < 4) throw RangeError("clip too short for time-reverse augmentation (need T >= 4)");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(length / 2 + 1, length);
  Augmentation aug;
  aug.pivot = pick(rng);
  aug.indices = palindrome_indices(length, aug.pivot);
  return aug;
}

std::array<double, kActionDims> action_distribution(const std::vector<ClipMetadata>& clips,
                                                    const std::vector<std::size_t>& subset) {
  std::array<double, kActionDims> dist{};
  double total = 0.0;
  for (const auto i : subset) {
    for (std::size_t s = 0; s < kActionDims; ++s) {
      dist[s] += static_cast<double>(clips[i].action_histogram[s]);
      total += static_cast<double>(clips[i].action_histogram[s]);
    }
  }
  if (total > 0.0) {
    for (auto& d : dist) d /= total;
  }
  return dist;
}

double l1_to_target(const std::array<double, kActionDims>& dist,
                    const std::array<double, kActionDims>& target) {
  double sum = 0.0;
  for (std::size_t s = 0; s < kActionDims; ++s) sum += std::abs(dist[s] - target[s]);
  return sum;
}

namespace {

double l1_of_counts(const std::array<double, kActionDims>& counts,
                    const std::array<double, kActionDims>& target) {
  const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
  double sum = 0.0;
  for (std::size_t s = 0; s < kActionDims; ++s) {
    sum += std::abs((total > 0.0 ? counts[s] / total : 0.0) - target[s]);
  }
  return sum;
}

}  // namespace

BalanceResult balance_sample(const std::vector<ClipMetadata>& clips,
                             const std::array<double, kActionDims>& target, std::uint64_t seed) {
  if (clips.empty()) throw ValidationError("no clips to balance");
  double tsum = 0.0;
  for (const double t : target) {
    if (!(t >= 0.0)) throw ValidationError("target proportions must be non-negative");
    tsum += t;
  }
  if (std::abs(tsum - 1.0) > 1e-9) throw ValidationError("target proportions must sum to 1");

  std::vector<std::size_t> order(clips.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<bool> kept(clips.size(), true);
  std::array<double, kActionDims> counts{};
  for (const auto& c : clips) {
    for (std::size_t s = 0; s < kActionDims; ++s) counts[s] += static_cast<double>(c.action_histogram[s]);
  }
  double current = l1_of_counts(counts, target);
  std::size_t remaining = clips.size();

  while (remaining > 1) {
    std::size_t best = clips.size();
    double best_dist = current;
    for (const auto i : order) {
      if (!kept[i]) continue;
      auto trial = counts;
      for (std::size_t s = 0; s < kActionDims; ++s) trial[s] -= static_cast<double>(clips[i].action_histogram[s]);
      const double d = l1_of_counts(trial, target);
      if (d < best_dist) {
        best_dist = d;
        best = i;
      }
    }
    if (best == clips.size()) break;
    kept[best] = false;
    for (std::size_t s = 0; s < kActionDims; ++s) counts[s] -= static_cast<double>(clips[best].action_histogram[s]);
    current = best_dist;
    --remaining;
  }

  BalanceResult result;
  for (std::size_t i = 0; i < clips.size(); ++i) {
    if (kept[i]) result.selected.push_back(i);
  }
  result.achieved = action_distribution(clips, result.selected);
  result.l1_distance = l1_to_target(result.achieved, target);
  return result;
}

const std::string& select_caption(const std::vector<CaptionSegment>& segments, double sample_start,
                                  double segment_seconds) {
  if (segments.empty()) throw RangeError("clip has no caption segments");
  if (!(segment_seconds > 0.0)) throw ValidationError("segment length must be positive");
  if (!std::isfinite(sample_start) || sample_start < segments.front().start ||
      sample_start >= segments.back().start + segment_seconds) {
    throw RangeError("sample start " + std::to_string(sample_start) + " s lies outside caption coverage");
  }
  const auto it = std::upper_bound(segments.begin(), segments.end(), sample_start,
                                   [](double s, const CaptionSegment& seg) { return s < seg.start; });
  return std::prev(it)->text;
}

std::string serialize_clip(const ClipMetadata& clip) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : clip.caption_segments) segs.push_back({{"start", s.start}, {"text", s.text}});
  return nlohmann::json{{"clip_id", clip.clip_id},
                        {"duration", clip.duration},
                        {"action_histogram", clip.action_histogram},
                        {"jitter_score", clip.jitter_score},
                        {"velocity_cv", clip.velocity_cv},
                        {"caption_segments", segs}}
      .dump();
}

ClipMetadata parse_clip(std::string_view line, std::size_t record) {
  using nlohmann::json;
  ClipMetadata m;
  try {
    const json j = json::parse(line);
    m.clip_id = j.at("clip_id").get<std::string>();
    m.duration = j.at("duration").get<double>();
    const auto hist = j.at("action_histogram").get<std::vector<std::int64_t>>();
    if (hist.size() != kActionDims) throw ParseError(record, "action_histogram needs 13 counts");
    for (std::size_t s = 0; s < kActionDims; ++s) {
      if (hist[s] < 0) throw ValidationError("record " + std::to_string(record) + ": negative histogram count");
      m.action_histogram[s] = static_cast<std::uint64_t>(hist[s]);
    }
    m.jitter_score = j.value("jitter_score", 0.0);
    m.velocity_cv = j.value("velocity_cv", 0.0);
    if (const auto segs = j.find("caption_segments"); segs != j.end()) {
      for (const auto& s : *segs) m.caption_segments.push_back({s.at("start").get<double>(), s.at("text").get<std::string>()});
    }
  } catch (const json::exception& err) {
    throw ParseError(record, err.what());
  }
  try {
    m.validate();
  } catch (const ValidationError& err) {
    throw ValidationError("record " + std::to_string(record) + ": " + err.what());
  }
  return m;
}

std::vector<ClipMetadata> parse_manifest(std::string_view text) {
  std::vector<ClipMetadata> clips;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t record = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    clips.push_back(parse_clip(line, record++));
  }
  return clips;
}

std::vector<HistogramBin> action_histogram_table(const std::vector<ClipMetadata>& clips) {
  std::vector<HistogramBin> rows;
  for (std::size_t s = 0; s < kActionDims; ++s) {
    std::uint64_t count = 0;
    for (const auto& c : clips) count += c.action_histogram[s];
    rows.push_back({std::string(action_name(static_cast<Action>(s))), count});
  }
  return rows;
}

std::vector<HistogramBin> duration_histogram_table(const std::vector<ClipMetadata>& clips,
                                                   double bin_seconds) {
  if (!(bin_seconds > 0.0)) throw ValidationError("bin width must be positive");
  std::size_t bins = 0;
  for (const auto& c : clips) bins = std::max(bins, static_cast<std::size_t>(c.duration / bin_seconds) + 1);
  std::vector<std::uint64_t> counts(bins, 0);
  for (const auto& c : clips) ++counts[static_cast<std::size_t>(c.duration / bin_seconds)];
  std::vector<HistogramBin> rows;
  for (std::size_t b = 0; b < bins; ++b) {
    std::ostringstream label;
    label << static_cast<double>(b) * bin_seconds << '-' << static_cast<double>(b + 1) * bin_seconds;
    rows.push_back({label.str(), counts[b]});
  }
  return rows;
}

}  // namespace relicforge
