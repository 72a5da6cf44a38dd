// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/distill_replay.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "relicforge/autodiff.hpp"
#include "relicforge/error.hpp"

namespace relicforge {

void ToyGenerator::validate() const {
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw ValidationError("generator parameters must be finite");
  }
}

Sample gaussian_score(const Sample& x, double mu, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  return -(x.array() - mu) / (sigma * sigma);
}

ScoreFn gaussian_score_fn(double mu, double sigma) {
  if (!(sigma > 0.0)) throw ValidationError("sigma must be positive");
  return [mu, sigma](const Sample& x) { return gaussian_score(x, mu, sigma); };
}

double diffusion_alpha(double u) {
  if (u == 0.0) return 1.0;
  return std::cos(0.5 * std::numbers::pi * u);
}

namespace {

void check_noises(const Samples& noises) {
  if (noises.empty()) throw ShapeError("need at least one block of noise");
  for (const auto& e : noises) {
    if (e.size() != noises.front().size()) throw ShapeError("noise blocks differ in size");
  }
}

}  // namespace

Samples self_rollout(const ToyGenerator& g, const Samples& noises) {
  g.validate();
  check_noises(noises);
  Samples out;
  out.reserve(noises.size());
  Sample ctx = Sample::Zero(noises.front().size());
  for (const auto& eps : noises) {
    // Same operation order as the taped forward pass.
    Sample x = g.a * ctx;
    x = x + g.b * eps;
    x = x.array() + g.c;
    out.push_back(x);
    ctx = out.back();
  }
  return out;
}

ScoreDiffMap score_diff_maps(const Samples& samples, const ScoreFn& real, const ScoreFn& fake,
                             double u) {
  const double alpha = diffusion_alpha(u);
  ScoreDiffMap diff;
  diff.reserve(samples.size());
  for (const auto& x : samples) {
    const Sample noisy = alpha * x;
    diff.push_back(real(noisy) - fake(noisy));
  }
  return diff;
}

namespace {

struct Params {
  Tape::Var a, b, c;
};

Params push_params(Tape& tape, const ToyGenerator& g) {
  return {tape.parameter(g.a), tape.parameter(g.b), tape.parameter(g.c)};
}

Tape::Var block_forward(Tape& tape, const Params& p, Tape::Var ctx, Tape::Var eps) {
  return tape.add_scalar(tape.add(tape.scale(p.a, ctx), tape.scale(p.b, eps)), p.c);
}

void check_diff(const Samples& noises, const ScoreDiffMap& diff) {
  if (diff.size() != noises.size()) throw ShapeError("score-difference map length differs from block count");
  for (const auto& d : diff) {
    if (d.size() != noises.front().size()) throw ShapeError("score-difference block has wrong size");
  }
}

}  // namespace

Eigen::Vector3d replay_accumulate(const ToyGenerator& g, const Samples& noises,
                                  const ScoreDiffMap& diff, TapeStats* stats) {
  check_noises(noises);
  check_diff(noises, diff);
  // Contexts come from the gradient-free rollout.
  const Samples rollout = self_rollout(g, noises);
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Tape tape;
  for (std::size_t l = 0; l < noises.size(); ++l) {
    const Params p = push_params(tape, g);
    const Tape::Var ctx =
        tape.constant(l == 0 ? Sample::Zero(noises[l].size()) : rollout[l - 1]);
    const Tape::Var x = block_forward(tape, p, ctx, tape.constant(noises[l]));
    const std::pair<Tape::Var, Tape::Value> seed{x, -diff[l]};
    tape.backward({&seed, 1});
    grad += Eigen::Vector3d(tape.grad(p.a), tape.grad(p.b), tape.grad(p.c));
    tape.clear();
  }
  if (stats) *stats = {tape.peak_nodes(), tape.peak_footprint()};
  return grad;
}

Eigen::Vector3d monolithic_gradient(const ToyGenerator& g, const Samples& noises,
                                    const ScoreDiffMap& diff, TapeStats* stats) {
  g.validate();
  check_noises(noises);
  check_diff(noises, diff);
  Tape tape;
  const Params p = push_params(tape, g);
  std::vector<std::pair<Tape::Var, Tape::Value>> seeds;
  seeds.reserve(noises.size());
  Sample ctx = Sample::Zero(noises.front().size());
  for (std::size_t l = 0; l < noises.size(); ++l) {
    const Tape::Var x = block_forward(tape, p, tape.constant(ctx), tape.constant(noises[l]));
    ctx = tape.value(x);  // stop-gradient: re-enters as a constant
    seeds.emplace_back(x, -diff[l]);
  }
  tape.backward(seeds);
  if (stats) *stats = {tape.peak_nodes(), tape.peak_footprint()};
  return {tape.grad(p.a), tape.grad(p.b), tape.grad(p.c)};
}

Samples draw_noise(std::size_t blocks, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Samples out(blocks, Sample(static_cast<Eigen::Index>(dim)));
  for (auto& e : out) {
    for (Eigen::Index i = 0; i < e.size(); ++i) e[i] = normal(rng);
  }
  return out;
}

namespace {

double mean_of(const Samples& s) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& x : s) {
    sum += x.sum();
    n += static_cast<std::size_t>(x.size());
  }
  return sum / static_cast<double>(n);
}

}  // namespace

std::vector<DemoStep> dmd_fit_demo(const DemoConfig& cfg) {
  if (cfg.blocks == 0 || cfg.dim == 0) throw ValidationError("blocks and dim must be positive");
  if (!std::isfinite(cfg.lr)) throw ValidationError("lr must be finite");
  cfg.init.validate();
  const Samples noises = draw_noise(cfg.blocks, cfg.dim, cfg.seed);
  const double elements = static_cast<double>(cfg.blocks * cfg.dim);
  ToyGenerator g = cfg.init;
  std::vector<DemoStep> history;
  history.reserve(cfg.steps + 1);
  for (std::size_t step = 0;; ++step) {
    const Samples x = self_rollout(g, noises);
    const double mean = mean_of(x);
    if (step == cfg.steps) {
      history.push_back({step, g.c, mean, 0.0});
      break;
    }
    const double u = kTimesteps[step % kTimesteps.size()];
    const double alpha = diffusion_alpha(u);
    const ScoreDiffMap diff = score_diff_maps(x, gaussian_score_fn(alpha * cfg.target_mu, 1.0),
                                              gaussian_score_fn(alpha * mean, 1.0), u);
    const Eigen::Vector3d grad = replay_accumulate(g, noises, diff) / elements;
    history.push_back({step, g.c, mean, grad.norm()});
    g.a -= cfg.lr * grad[0];
    g.b -= cfg.lr * grad[1];
    g.c -= cfg.lr * grad[2];
    if (!std::isfinite(g.a) || !std::isfinite(g.b) || !std::isfinite(g.c) ||
        std::abs(g.c) > 1e6) {
      std::ostringstream msg;
      msg << "distillation diverged at step " << step << ": theta_c = " << g.c
          << ", sample mean = " << mean << ", lr = " << cfg.lr;
      throw DivergenceError(msg.str());
    }
  }
  return history;
}

}  // namespace relicforge
