// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

// Replayed back-propagation for distribution-matching distillation on a toy
// block-autoregressive generator
//
//   x_l = a * stopgrad(x_{l-1}) + b * eps_l + c,   x_0 := 0
//
// The rollout runs without a tape, score differences are cached per block,
// and the gradient is then rebuilt one block at a time so the tape never
// holds more than a single block. Cross-block gradients are cut in both the
// replay and the monolithic path, so the two agree to rounding.

#pragma once

#include <Eigen/Core>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace relicforge {

using Sample = Eigen::VectorXd;
using Samples = std::vector<Sample>;

struct ToyGenerator {
  double a = 0.0;  // context gain
  double b = 1.0;  // noise gain
  double c = 0.0;  // offset

  Eigen::Vector3d theta() const { return {a, b, c}; }
  void validate() const;
};

using ScoreFn = std::function<Sample(const Sample&)>;

/// Score of N(mu, sigma^2) elementwise: -(x - mu) / sigma^2.
Sample gaussian_score(const Sample& x, double mu, double sigma);
ScoreFn gaussian_score_fn(double mu, double sigma);

/// Diffusion timesteps sampled by the distillation loop.
inline constexpr std::array<double, 4> kTimesteps = {0.0, 0.25, 0.5, 0.75};

/// Noise-free variance-preserving scaling: x * cos(pi u / 2).
double diffusion_alpha(double u);

Samples self_rollout(const ToyGenerator& g, const Samples& noises);

using ScoreDiffMap = Samples;

/// real(Psi(x_l, u)) - fake(Psi(x_l, u)) for every block.
ScoreDiffMap score_diff_maps(const Samples& samples, const ScoreFn& real, const ScoreFn& fake,
                             double u);

struct TapeStats {
  std::size_t peak_nodes = 0;
  std::size_t peak_footprint = 0;  // doubles
};

/// Block-by-block replay: sum_l -diff_l^T dx_l/dtheta, tape cleared after each
/// block. Throws ShapeError when diff and noises disagree in length.
Eigen::Vector3d replay_accumulate(const ToyGenerator& g, const Samples& noises,
                                  const ScoreDiffMap& diff, TapeStats* stats = nullptr);

/// The same gradient from one tape spanning the whole rollout.
Eigen::Vector3d monolithic_gradient(const ToyGenerator& g, const Samples& noises,
                                    const ScoreDiffMap& diff, TapeStats* stats = nullptr);

struct DemoConfig {
  double target_mu = 3.0;
  std::size_t steps = 500;
  double lr = 0.1;
  std::size_t blocks = 4;
  std::size_t dim = 16;
  std::uint64_t seed = 0;
  ToyGenerator init{};
};

struct DemoStep {
  std::size_t step = 0;
  double theta_c = 0.0;
  double sample_mean = 0.0;
  double grad_norm = 0.0;
};

/// Fits the generator's sample mean to N(target_mu, 1) with the real score
/// of the target and the fake score of N(current mean, 1), cycling the
/// timestep through kTimesteps. Noise is drawn once from the seed and held
/// fixed. Gradients are averaged per element. Returns one row per step
/// (state before the update) plus the final state. Throws DivergenceError if
/// |c| exceeds 1e6 or anything turns non-finite.
std::vector<DemoStep> dmd_fit_demo(const DemoConfig& cfg);

/// Fixed-seed standard normal noise, `blocks` vectors of length `dim`.
Samples draw_noise(std::size_t blocks, std::size_t dim, std::uint64_t seed);

}  // namespace relicforge
