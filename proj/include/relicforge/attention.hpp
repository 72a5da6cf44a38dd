// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

// Small reference attention engine. Dimensions are tiny; it exists to check
// the streaming cache and the conditioning contract end to end.

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "relicforge/action_codec.hpp"
#include "relicforge/kernels.hpp"
#include "relicforge/memory_cache.hpp"
#include "relicforge/trajectory.hpp"

namespace relicforge {

struct ToyConfig {
  std::size_t d_model = 16;
  std::size_t n_heads = 2;
  double rope_base = 10000.0;
  bool pose_before_rope = true;

  std::size_t head_dim() const { return d_model / n_heads; }
  /// Throws ConfigError unless d_model splits into even-width heads.
  void validate() const;
};

struct ConditioningEmbeddings {
  Matrix pose;    // latents x d_model
  Matrix action;  // latents x d_model
};

/// Latent grouping of a frame sequence under 4x causal temporal compression:
/// the first frame alone, then groups of four. Returns group start offsets.
std::vector<std::size_t> latent_groups(std::size_t frames);

/// Mean of each group's 13-slot action vectors (groups x 13).
Matrix action_group_means(const ActionSequence& seq);

/// Group means of the 12 motion slots lifted to d_model by a fixed random
/// matrix drawn from `seed`. Static frames therefore embed to zero.
Matrix encode_actions(const ActionSequence& seq, const ToyConfig& cfg, std::uint64_t seed = 7);

/// Sinusoidal featurization of (position, world-to-camera quaternion) of the
/// last frame in each latent group.
Matrix encode_poses(const Trajectory& traj, const ToyConfig& cfg);

/// Rotary embedding on every head: pair (2i, 2i+1) turns by
/// position * base^(-2i / head_dim).
Matrix apply_rope(const Matrix& x, std::span<const double> positions, const ToyConfig& cfg);

/// Masked softmax attention with per-head QK normalization. Fully masked
/// rows produce zeros.
Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const Mask& mask,
              const ToyConfig& cfg);
Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              const ToyConfig& cfg);

enum class InjectionStage { kPreAttentionQK, kPostAttention };
enum class EmbeddingKind { kPose, kAction };

struct BlockTensors {
  Matrix q;
  Matrix k;
  Matrix v;
  Matrix hidden;  // residual stream after attention
};

/// Repeats per-latent rows so each token carries its latent's embedding.
Matrix broadcast_to_tokens(const Matrix& per_latent, std::span<const std::size_t> token_latent);

/// Pose embeddings go into q and k before attention (v untouched); action
/// embeddings go into the hidden state after attention. Any other pairing
/// throws ContractError. `per_token` must match the targeted tensors' shape.
void inject_conditioning(BlockTensors& block, const Matrix& per_token, EmbeddingKind kind,
                         InjectionStage stage);

struct ToyWeights {
  Matrix wq, wk, wv, wo;  // d_model x d_model each
  static ToyWeights random(const ToyConfig& cfg, std::uint64_t seed);
};

/// One conditioned transformer block: projections, pose injection into q/k,
/// RoPE, masked attention, output projection with residual, then action
/// injection.
Matrix run_block(const Matrix& x, const ToyWeights& w, const ConditioningEmbeddings& cond,
                 std::span<const std::size_t> token_latent, std::span<const double> positions,
                 const Mask& mask, const ToyConfig& cfg);

/// Streaming attention over the compressed KV cache. Each step attends the
/// new latent's queries to every cached key (window latents uncompressed,
/// older latents pooled by the schedule) plus its own keys, then pushes the
/// new keys/values into the cache.
class StreamingAttention {
 public:
  StreamingAttention(CompressionSchedule schedule, Grid grid, ToyConfig cfg);

  /// q/k/v are grid.tokens() x d_model, tokens in row-major grid order.
  /// Throws ShapeError on mismatch.
  Matrix step(const Matrix& q, const Matrix& k, const Matrix& v);

  const StreamingCache& cache() const noexcept { return cache_; }
  std::size_t cached_key_rows() const;

 private:
  ToyConfig cfg_;
  Grid grid_;
  StreamingCache cache_;
  std::vector<TokenGrid> keys_;
  std::vector<TokenGrid> values_;
};

TokenGrid grid_from_rows(const Matrix& rows, Grid grid);
Matrix rows_from_grid(const TokenGrid& grid);

}  // namespace relicforge
