// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relicforge/kernels.hpp"

namespace relicforge {

/// Per-axis spatial downsampling factors applied recurrently to latents as
/// they leave the rolling window: latent i gets factors[i % factors.size()].
class CompressionSchedule {
 public:
  CompressionSchedule(std::vector<std::size_t> factors, std::size_t window);

  /// The 18-entry interleaved 1x/2x/4x schedule with a 9-latent window.
  static CompressionSchedule standard();

  std::size_t factor_for(std::size_t latent_index) const {
    return factors_[latent_index % factors_.size()];
  }
  const std::vector<std::size_t>& factors() const noexcept { return factors_; }
  std::size_t window() const noexcept { return window_; }

 private:
  std::vector<std::size_t> factors_;
  std::size_t window_;
};

struct Grid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t tokens() const noexcept { return height * width; }
  bool operator==(const Grid&) const = default;
};

/// Shape of a grid pooled by `factor` with ceiling division.
Grid pooled_grid(Grid g, std::size_t factor);

enum class LatentState { kWindow, kMemory };

struct LatentDescriptor {
  std::size_t index = 0;
  Grid grid;             // current stored grid, pooled when in memory
  LatentState state = LatentState::kWindow;
  std::size_t factor = 1;
  std::size_t bytes_per_element = 2;
};

struct AdvanceReport {
  std::size_t appended_index = 0;
  std::optional<std::size_t> compressed_index;
  std::size_t factor = 1;  // factor applied to compressed_index, 1 when nothing left the window
};

struct CacheAccount {
  std::uint64_t tokens = 0;
  std::uint64_t bytes = 0;
  std::uint64_t attention_flops = 0;
  bool operator==(const CacheAccount&) const = default;
};

/// Bookkeeping state of the compressed streaming KV cache: a rolling window
/// of uncompressed latents followed (in age) by schedule-compressed memory.
class StreamingCache {
 public:
  StreamingCache(CompressionSchedule schedule, std::size_t d_model,
                 std::size_t bytes_per_element = 2);

  /// Appends a window latent; the oldest window latent is compressed when
  /// the window overflows. Throws ShapeError if `grid` differs from earlier
  /// latents.
  AdvanceReport advance(Grid grid);

  const std::vector<LatentDescriptor>& descriptors() const noexcept { return descriptors_; }
  const CompressionSchedule& schedule() const noexcept { return schedule_; }
  std::size_t d_model() const noexcept { return d_model_; }
  std::size_t bytes_per_element() const noexcept { return bytes_per_element_; }
  std::size_t size() const noexcept { return descriptors_.size(); }
  std::uint64_t running_tokens() const noexcept { return running_tokens_; }

  /// Tokens that would be held without compression.
  std::uint64_t uncompressed_tokens() const;
  /// Throws ContractError if any invariant is broken (window cardinality,
  /// schedule conformance, counters vs. descriptors).
  void check_invariants() const;

 private:
  CompressionSchedule schedule_;
  std::size_t d_model_;
  std::size_t bytes_per_element_;
  std::optional<Grid> grid_;
  std::vector<LatentDescriptor> descriptors_;
  std::uint64_t running_tokens_ = 0;
};

/// tokens, bytes = tokens * 2 (K and V) * d_model * bytes_per_element, and
/// attention FLOPs = 4 * d_model * q_tokens * kv_tokens where q_tokens is the
/// newest latent's uncompressed token count.
CacheAccount account(const StreamingCache& cache);
/// Same accounting if every latent were kept uncompressed.
CacheAccount account_uncompressed(const StreamingCache& cache);

/// Area-average pooling with boundary-truncated windows; factor 1 is the
/// identity.
TokenGrid compress_token_grid(const TokenGrid& grid, std::size_t factor);

Mask build_block_causal_mask(std::span<const std::size_t> block_token_counts);
/// First B-K blocks are clean context (bidirectional among themselves), the
/// last K blocks see the whole clean prefix plus block-causal suffix.
Mask build_hybrid_forcing_mask(std::size_t total_blocks, std::size_t noisy_blocks,
                               std::span<const std::size_t> block_token_counts);

// Schedule config file (JSON): {"factors": [...], "window": w, "grid": [H, W],
// "bytes_per_element": 1|2, "d_model": n}
struct CacheConfig {
  CompressionSchedule schedule = CompressionSchedule::standard();
  Grid grid{30, 52};
  std::size_t bytes_per_element = 2;
  std::size_t d_model = 5120;
};
CacheConfig parse_cache_config(std::string_view text);

}  // namespace relicforge
