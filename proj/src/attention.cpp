// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/attention.hpp"

#include <cmath>
#include <random>

#include "relicforge/error.hpp"

namespace relicforge {

void ToyConfig::validate() const {
  if (n_heads == 0 || d_model == 0 || d_model % n_heads != 0) {
    throw ConfigError("d_model must be a positive multiple of n_heads");
  }
  if (head_dim() % 2 != 0) throw ConfigError("head_dim must be even for rotary embedding");
  if (!(rope_base > 1.0)) throw ConfigError("rope_base must exceed 1");
}

std::vector<std::size_t> latent_groups(std::size_t frames) {
  std::vector<std::size_t> starts;
  if (frames == 0) return starts;
  starts.push_back(0);
  for (std::size_t s = 1; s < frames; s += 4) starts.push_back(s);
  return starts;
}

Matrix action_group_means(const ActionSequence& seq) {
  const std::size_t n = seq.actions.size();
  const auto starts = latent_groups(n);
  Matrix means = Matrix::Zero(static_cast<Eigen::Index>(starts.size()), kActionDims);
  for (std::size_t g = 0; g < starts.size(); ++g) {
    const std::size_t end = g + 1 < starts.size() ? starts[g + 1] : n;
    for (std::size_t t = starts[g]; t < end; ++t) {
      for (std::size_t s = 0; s < kActionDims; ++s) {
        means(static_cast<Eigen::Index>(g), static_cast<Eigen::Index>(s)) += seq.actions[t].slots()[s];
      }
    }
    means.row(static_cast<Eigen::Index>(g)) /= static_cast<double>(end - starts[g]);
  }
  return means;
}

Matrix encode_actions(const ActionSequence& seq, const ToyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  if (seq.actions.empty()) throw ValidationError("action sequence is empty");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(12.0));
  Matrix lift(12, static_cast<Eigen::Index>(cfg.d_model));
  for (Eigen::Index i = 0; i < lift.size(); ++i) lift.data()[i] = normal(rng);
  const Matrix means = action_group_means(seq);
  return means.leftCols(12) * lift;
}

Matrix encode_poses(const Trajectory& traj, const ToyConfig& cfg) {
  cfg.validate();
  const auto starts = latent_groups(traj.size());
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  Matrix out(static_cast<Eigen::Index>(starts.size()), d);
  for (std::size_t g = 0; g < starts.size(); ++g) {
    const std::size_t last = g + 1 < starts.size() ? starts[g + 1] - 1 : traj.size() - 1;
    const CameraPose& p = traj[last];
    const Quat& q = p.quaternion();
    const double features[7] = {p.position().x(), p.position().y(), p.position().z(),
                                q.w(), q.x(), q.y(), q.z()};
    for (Eigen::Index j = 0; j < d; ++j) {
      const auto band = j / 7;
      const double freq = std::ldexp(1.0, -static_cast<int>(band / 2));
      const double arg = freq * features[j % 7];
      out(static_cast<Eigen::Index>(g), j) = band % 2 == 0 ? std::sin(arg) : std::cos(arg);
    }
  }
  return out;
}

Matrix apply_rope(const Matrix& x, std::span<const double> positions, const ToyConfig& cfg) {
  cfg.validate();
  if (x.cols() != static_cast<Eigen::Index>(cfg.d_model)) throw ShapeError("width differs from d_model");
  if (positions.size() != static_cast<std::size_t>(x.rows())) throw ShapeError("one position per row");
  const std::size_t hd = cfg.head_dim();
  Matrix out = x;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const double pos = positions[static_cast<std::size_t>(r)];
    for (std::size_t h = 0; h < cfg.n_heads; ++h) {
      for (std::size_t i = 0; i < hd / 2; ++i) {
        const double theta = std::pow(cfg.rope_base, -2.0 * static_cast<double>(i) / static_cast<double>(hd));
        const double c = std::cos(pos * theta);
        const double s = std::sin(pos * theta);
        const auto a = static_cast<Eigen::Index>(h * hd + 2 * i);
        const double x0 = x(r, a);
        const double x1 = x(r, a + 1);
        out(r, a) = x0 * c - x1 * s;
        out(r, a + 1) = x0 * s + x1 * c;
      }
    }
  }
  return out;
}

Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              const ToyConfig& cfg) {
  cfg.validate();
  if (q.cols() != static_cast<Eigen::Index>(cfg.d_model)) throw ShapeError("width differs from d_model");
  return kernels::omp::attend(q, k, v, mask, cfg.n_heads);
}

Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const Mask& mask,
              const ToyConfig& cfg) {
  if (mask.size() != static_cast<std::size_t>(q.rows()) || q.rows() != k.rows()) {
    throw ShapeError("square mask needs equal query and key counts");
  }
  return attend(q, k, v, RectMask::from(mask), cfg);
}

Matrix broadcast_to_tokens(const Matrix& per_latent, std::span<const std::size_t> token_latent) {
  Matrix out(static_cast<Eigen::Index>(token_latent.size()), per_latent.cols());
  for (std::size_t t = 0; t < token_latent.size(); ++t) {
    if (token_latent[t] >= static_cast<std::size_t>(per_latent.rows())) {
      throw ShapeError("token refers to a latent without an embedding");
    }
    out.row(static_cast<Eigen::Index>(t)) = per_latent.row(static_cast<Eigen::Index>(token_latent[t]));
  }
  return out;
}

void inject_conditioning(BlockTensors& block, const Matrix& per_token, EmbeddingKind kind,
                         InjectionStage stage) {
  if (kind == EmbeddingKind::kPose && stage != InjectionStage::kPreAttentionQK) {
    throw ContractError("pose embeddings are injected into q/k before attention");
  }
  if (kind == EmbeddingKind::kAction && stage != InjectionStage::kPostAttention) {
    throw ContractError("action embeddings are injected into the hidden state after attention");
  }
  if (!per_token.allFinite()) throw ValidationError("embedding has non-finite entries");
  if (stage == InjectionStage::kPreAttentionQK) {
    if (per_token.rows() != block.q.rows() || per_token.cols() != block.q.cols() ||
        block.k.rows() != block.q.rows() || block.k.cols() != block.q.cols()) {
      throw ShapeError("pose embedding does not match q/k");
    }
    block.q += per_token;
    block.k += per_token;
  } else {
    if (per_token.rows() != block.hidden.rows() || per_token.cols() != block.hidden.cols()) {
      throw ShapeError("action embedding does not match hidden state");
    }
    block.hidden += per_token;
  }
}

ToyWeights ToyWeights::random(const ToyConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(cfg.d_model)));
  const auto d = static_cast<Eigen::Index>(cfg.d_model);
  auto draw = [&] {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
    return m;
  };
  ToyWeights w;
  w.wq = draw();
  w.wk = draw();
  w.wv = draw();
  w.wo = draw();
  return w;
}

Matrix run_block(const Matrix& x, const ToyWeights& w, const ConditioningEmbeddings& cond,
                 std::span<const std::size_t> token_latent, std::span<const double> positions,
                 const Mask& mask, const ToyConfig& cfg) {
  cfg.validate();
  BlockTensors b{x * w.wq, x * w.wk, x * w.wv, {}};
  const Matrix pose = broadcast_to_tokens(cond.pose, token_latent);
  if (cfg.pose_before_rope) {
    inject_conditioning(b, pose, EmbeddingKind::kPose, InjectionStage::kPreAttentionQK);
    b.q = apply_rope(b.q, positions, cfg);
    b.k = apply_rope(b.k, positions, cfg);
  } else {
    b.q = apply_rope(b.q, positions, cfg);
    b.k = apply_rope(b.k, positions, cfg);
    inject_conditioning(b, pose, EmbeddingKind::kPose, InjectionStage::kPreAttentionQK);
  }
  b.hidden = x + attend(b.q, b.k, b.v, mask, cfg) * w.wo;
  inject_conditioning(b, broadcast_to_tokens(cond.action, token_latent), EmbeddingKind::kAction,
                      InjectionStage::kPostAttention);
  return b.hidden;
}

TokenGrid grid_from_rows(const Matrix& rows, Grid grid) {
  if (static_cast<std::size_t>(rows.rows()) != grid.tokens()) throw ShapeError("row count differs from grid");
  TokenGrid g(grid.height, grid.width, static_cast<std::size_t>(rows.cols()));
  std::copy(rows.data(), rows.data() + rows.size(), g.values.begin());
  return g;
}

Matrix rows_from_grid(const TokenGrid& grid) {
  Matrix m(static_cast<Eigen::Index>(grid.tokens()), static_cast<Eigen::Index>(grid.channels));
  std::copy(grid.values.begin(), grid.values.end(), m.data());
  return m;
}

StreamingAttention::StreamingAttention(CompressionSchedule schedule, Grid grid, ToyConfig cfg)
    : cfg_(cfg), grid_(grid), cache_(std::move(schedule), cfg.d_model) {
  cfg_.validate();
  if (grid_.tokens() == 0) throw ShapeError("latent grid must be non-empty");
}

std::size_t StreamingAttention::cached_key_rows() const {
  std::size_t n = 0;
  for (const auto& k : keys_) n += k.tokens();
  return n;
}

Matrix StreamingAttention::step(const Matrix& q, const Matrix& k, const Matrix& v) {
  const auto tokens = static_cast<Eigen::Index>(grid_.tokens());
  const auto d = static_cast<Eigen::Index>(cfg_.d_model);
  for (const Matrix* m : {&q, &k, &v}) {
    if (m->rows() != tokens || m->cols() != d) throw ShapeError("block shape drifted from the cache grid");
  }
  const auto history = static_cast<Eigen::Index>(cached_key_rows());
  Matrix keys(history + tokens, d);
  Matrix values(history + tokens, d);
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < keys_.size(); ++i) {
    const auto n = static_cast<Eigen::Index>(keys_[i].tokens());
    keys.middleRows(row, n) = rows_from_grid(keys_[i]);
    values.middleRows(row, n) = rows_from_grid(values_[i]);
    row += n;
  }
  keys.bottomRows(tokens) = k;
  values.bottomRows(tokens) = v;
  // Earlier blocks are all visible and the block sees itself: the
  // block-causal row for the newest block is all true.
  Matrix out = attend(q, keys, values, RectMask::all(q.rows(), keys.rows()), cfg_);

  keys_.push_back(grid_from_rows(k, grid_));
  values_.push_back(grid_from_rows(v, grid_));
  const AdvanceReport report = cache_.advance(grid_);
  if (report.compressed_index) {
    const std::size_t i = *report.compressed_index;
    keys_[i] = compress_token_grid(keys_[i], report.factor);
    values_[i] = compress_token_grid(values_[i], report.factor);
  }
  return out;
}

}  // namespace relicforge
