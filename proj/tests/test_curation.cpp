// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <random>
#include <set>

#include "relicforge/curation.hpp"
#include "relicforge/error.hpp"
#include "support/synthetic.hpp"

using namespace relicforge;
using namespace relicforge::testing;

namespace {

// Position k (0-based) of the palindrome for pivot p.
std::size_t palindrome_at(std::size_t k, std::size_t p) { return k < p ? k + 1 : 2 * p - (k + 1); }

ClipMetadata clip_with(std::string id, std::initializer_list<std::pair<Action, std::uint64_t>> counts) {
  ClipMetadata c;
  c.clip_id = std::move(id);
  c.duration = 10.0;
  for (const auto& [a, n] : counts) c.action_histogram[static_cast<std::size_t>(a)] = n;
  return c;
}

std::array<double, kActionDims> uniform_target() {
  std::array<double, kActionDims> t{};
  t.fill(1.0 / kActionDims);
  return t;
}

}  // namespace

TEST_CASE("palindrome_indices matches the closed form for every legal pivot") {
  for (std::size_t T = 4; T <= 40; ++T) {
    for (std::size_t p = T / 2 + 1; p <= T; ++p) {
      const auto idx = palindrome_indices(T, p);
      REQUIRE(idx.size() == T);
      std::size_t pivots = 0;
      for (std::size_t k = 0; k < T; ++k) {
        CHECK(idx[k] == palindrome_at(k, p));
        CHECK(idx[k] >= 1);
        CHECK(idx[k] <= T);
        pivots += idx[k] == p;
      }
      CHECK(pivots == 1);
    }
  }
}

TEST_CASE("palindrome_indices: worked example and range errors") {
  CHECK(palindrome_indices(8, 5) == std::vector<std::size_t>{1, 2, 3, 4, 5, 4, 3, 2});
  CHECK(palindrome_indices(8, 8) == std::vector<std::size_t>{1, 2, 3, 4, 5, 6, 7, 8});
  CHECK_THROWS_AS(palindrome_indices(3, 2), RangeError);
  CHECK_THROWS_AS(palindrome_indices(8, 4), RangeError);
  CHECK_THROWS_AS(palindrome_indices(8, 9), RangeError);
  CHECK_THROWS_AS(time_reverse_augment(2, 0), RangeError);
}

TEST_CASE("time_reverse_augment is seeded and covers the pivot range") {
  for (const std::size_t T : {8u, 9u, 16u}) {
    std::set<std::size_t> seen;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      const Augmentation a = time_reverse_augment(T, seed);
      CHECK(a.indices == palindrome_indices(T, a.pivot));
      CHECK(time_reverse_augment(T, seed).pivot == a.pivot);
      seen.insert(a.pivot);
    }
    CHECK(seen.size() == T - T / 2);
  }
}

TEST_CASE("filter_scores on simple paths") {
  const FilterScores line = filter_scores(straight_line(10, 1.5));
  CHECK(line.velocity_cv == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(line.jitter_score == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(line.max_angular_speed == 0.0);
  CHECK_FALSE(line.degenerate);

  std::vector<CameraPose> still;
  for (int t = 0; t < 4; ++t) still.emplace_back(Vec3::Zero(), Quat::Identity(), t);
  CHECK(filter_scores(Trajectory(still, 1.0)).degenerate);

  // Alternating step lengths 1 and 3: mean 2, stddev 1.
  std::vector<CameraPose> jerky;
  double x = 0.0;
  for (int t = 0; t < 9; ++t) {
    jerky.emplace_back(Vec3(x, 0, 0), Quat::Identity(), t);
    x += t % 2 == 0 ? 1.0 : 3.0;
  }
  const FilterScores s = filter_scores(Trajectory(jerky, 1.0));
  CHECK(s.velocity_cv == doctest::Approx(0.5));
  CHECK(s.jitter_score == doctest::Approx(1.0));
}

TEST_CASE("clip_metadata counts active slots per frame") {
  const Trajectory t = straight_line(6, 1.0);
  const ActionSequence seq = extract_actions(t);
  const ClipMetadata m = clip_metadata(t, seq);
  CHECK(m.duration == doctest::Approx(6.0 / 16.0));
  CHECK(m.action_histogram[static_cast<std::size_t>(Action::kDollyIn)] == 5);
  CHECK(m.action_histogram[static_cast<std::size_t>(Action::kStatic)] == 1);
}

TEST_CASE("balance_sample drops clips that skew the distribution") {
  std::vector<ClipMetadata> pool;
  // One clip per slot, plus two heavy dolly-in clips.
  for (std::size_t s = 0; s < kActionDims; ++s) pool.push_back(clip_with("c" + std::to_string(s), {{static_cast<Action>(s), 10}}));
  pool.push_back(clip_with("heavy_a", {{Action::kDollyIn, 50}}));
  pool.push_back(clip_with("heavy_b", {{Action::kDollyIn, 40}, {Action::kPanLeft, 5}}));

  const auto target = uniform_target();
  std::vector<std::size_t> all(pool.size());
  std::iota(all.begin(), all.end(), 0);
  const double before = l1_to_target(action_distribution(pool, all), target);

  const BalanceResult r = balance_sample(pool, target, 1);
  CHECK(r.l1_distance < before);
  CHECK(r.l1_distance == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.selected.size() == kActionDims);
  CHECK(std::is_sorted(r.selected.begin(), r.selected.end()));
  for (const auto i : r.selected) CHECK(pool[i].clip_id.rfind("heavy", 0) == std::string::npos);

  const BalanceResult again = balance_sample(pool, target, 1);
  CHECK(again.selected == r.selected);
}

TEST_CASE("balance_sample never does worse than the full pool") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::uint64_t> cnt(0, 30);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ClipMetadata> pool;
    for (int c = 0; c < 25; ++c) {
      ClipMetadata m = clip_with("clip" + std::to_string(c), {});
      for (auto& h : m.action_histogram) h = cnt(rng) < 10 ? cnt(rng) : 0;
      m.action_histogram[12] += 1;
      pool.push_back(m);
    }
    std::vector<std::size_t> all(pool.size());
    std::iota(all.begin(), all.end(), 0);
    const auto target = uniform_target();
    const BalanceResult r = balance_sample(pool, target, trial);
    CHECK(r.l1_distance <= l1_to_target(action_distribution(pool, all), target) + 1e-15);
    CHECK_FALSE(r.selected.empty());
  }
}

TEST_CASE("balance_sample validates its target") {
  std::vector<ClipMetadata> pool{clip_with("a", {{Action::kStatic, 1}})};
  auto bad = uniform_target();
  bad[0] += 0.1;
  CHECK_THROWS_AS(balance_sample(pool, bad, 0), ValidationError);
  CHECK_THROWS_AS(balance_sample({}, uniform_target(), 0), ValidationError);
}

TEST_CASE("select_caption picks the covering segment") {
  const std::vector<CaptionSegment> segs{{0.0, "a"}, {5.0, "b"}, {10.0, "c"}};
  CHECK(select_caption(segs, 0.0) == "a");
  CHECK(select_caption(segs, 4.999) == "a");
  CHECK(select_caption(segs, 5.0) == "b");
  CHECK(select_caption(segs, 14.9) == "c");
  CHECK_THROWS_AS(select_caption(segs, 15.0), RangeError);
  CHECK_THROWS_AS(select_caption(segs, -0.1), RangeError);
  CHECK_THROWS_AS(select_caption({}, 0.0), RangeError);
}

TEST_CASE("manifest lines round trip and report bad records") {
  ClipMetadata m = clip_with("clip_x", {{Action::kTiltUp, 3}, {Action::kStatic, 7}});
  m.jitter_score = 0.25;
  m.velocity_cv = 0.125;
  m.caption_segments = {{0.0, "a \"quoted\" street"}, {5.0, "bridge"}};
  const ClipMetadata back = parse_clip(serialize_clip(m));
  CHECK(back.clip_id == m.clip_id);
  CHECK(back.action_histogram == m.action_histogram);
  CHECK(back.jitter_score == m.jitter_score);
  CHECK(back.caption_segments.size() == 2);
  CHECK(back.caption_segments[0].text == m.caption_segments[0].text);

  const std::string text = serialize_clip(m) + "\n\n{\"clip_id\":\"y\",\"duration\":1}\n";
  try {
    parse_manifest(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.record() == 1);
  }
  CHECK_THROWS_AS(parse_clip(R"({"clip_id":"z","duration":0,"action_histogram":[0,0,0,0,0,0,0,0,0,0,0,0,1]})"),
                  ValidationError);
}

TEST_CASE("histogram tables") {
  std::vector<ClipMetadata> clips{clip_with("a", {{Action::kDollyIn, 2}}), clip_with("b", {{Action::kDollyIn, 3}})};
  clips[0].duration = 4.0;
  clips[1].duration = 25.0;
  const auto actions = action_histogram_table(clips);
  REQUIRE(actions.size() == kActionDims);
  CHECK(actions[0].bin == "dolly_in");
  CHECK(actions[0].count == 5);
  const auto durations = duration_histogram_table(clips, 10.0);
  REQUIRE(durations.size() == 3);
  CHECK(durations[0].bin == "0-10");
  CHECK(durations[0].count == 1);
  CHECK(durations[1].count == 0);
  CHECK(durations[2].count == 1);
  CHECK_THROWS_AS(duration_histogram_table(clips, 0.0), ValidationError);
}
