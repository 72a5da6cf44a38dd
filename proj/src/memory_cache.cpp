// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/memory_cache.hpp"

#include <json.hpp>

#include "relicforge/error.hpp"

namespace relicforge {

CompressionSchedule::CompressionSchedule(std::vector<std::size_t> factors, std::size_t window)
    : factors_(std::move(factors)), window_(window) {
  if (factors_.empty()) throw ConfigError("compression schedule is empty");
  for (const auto f : factors_) {
    if (f != 1 && f != 2 && f != 4) throw ConfigError("schedule factors must be 1, 2 or 4");
  }
  if (window_ < 1) throw ConfigError("window must be at least 1");
}

CompressionSchedule CompressionSchedule::standard() {
  return CompressionSchedule({1, 4, 2, 4, 4, 4, 2, 4, 4, 2, 4, 4, 4, 2, 4, 4, 2, 4}, 9);
}

Grid pooled_grid(Grid g, std::size_t factor) {
  return {(g.height + factor - 1) / factor, (g.width + factor - 1) / factor};
}

StreamingCache::StreamingCache(CompressionSchedule schedule, std::size_t d_model,
                               std::size_t bytes_per_element)
    : schedule_(std::move(schedule)), d_model_(d_model), bytes_per_element_(bytes_per_element) {
  if (d_model_ == 0) throw ConfigError("d_model must be positive");
  if (bytes_per_element_ != 1 && bytes_per_element_ != 2) {
    throw ConfigError("bytes_per_element must be 1 or 2");
  }
}

AdvanceReport StreamingCache::advance(Grid grid) {
  if (grid.height == 0 || grid.width == 0) throw ShapeError("latent grid must be non-empty");
  if (grid_ && !(*grid_ == grid)) throw ShapeError("latent grid differs from earlier latents");
  grid_ = grid;

  AdvanceReport report;
  report.appended_index = descriptors_.size();
  descriptors_.push_back({report.appended_index, grid, LatentState::kWindow, 1, bytes_per_element_});
  running_tokens_ += grid.tokens();

  if (descriptors_.size() > schedule_.window()) {
    auto& leaving = descriptors_[descriptors_.size() - 1 - schedule_.window()];
    const std::size_t s = schedule_.factor_for(leaving.index);
    const Grid pooled = pooled_grid(leaving.grid, s);
    running_tokens_ -= leaving.grid.tokens();
    running_tokens_ += pooled.tokens();
    leaving.grid = pooled;
    leaving.state = LatentState::kMemory;
    leaving.factor = s;
    report.compressed_index = leaving.index;
    report.factor = s;
  }
  return report;
}

std::uint64_t StreamingCache::uncompressed_tokens() const {
  return grid_ ? static_cast<std::uint64_t>(grid_->tokens()) * descriptors_.size() : 0;
}

void StreamingCache::check_invariants() const {
  const std::size_t n = descriptors_.size();
  const std::size_t in_window = std::min(n, schedule_.window());
  std::uint64_t tokens = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto& d = descriptors_[i];
    if (d.index != i) throw ContractError("descriptor order broken");
    const bool window = i + in_window >= n;
    if (window) {
      if (d.state != LatentState::kWindow || d.factor != 1 || !(d.grid == *grid_)) {
        throw ContractError("latent " + std::to_string(i) + " should be uncompressed");
      }
    } else {
      const std::size_t s = schedule_.factor_for(i);
      if (d.state != LatentState::kMemory || d.factor != s || !(d.grid == pooled_grid(*grid_, s))) {
        throw ContractError("latent " + std::to_string(i) + " does not follow the schedule");
      }
    }
    tokens += d.grid.tokens();
  }
  if (tokens != running_tokens_) throw ContractError("running token counter drifted");
}

namespace {

CacheAccount make_account(std::uint64_t tokens, std::uint64_t q_tokens, std::size_t d_model,
                          std::size_t bpe) {
  return {tokens, tokens * 2 * d_model * bpe, 4ULL * d_model * q_tokens * tokens};
}

}  // namespace

CacheAccount account(const StreamingCache& cache) {
  if (cache.size() == 0) return {};
  std::uint64_t tokens = 0;
  for (const auto& d : cache.descriptors()) tokens += d.grid.tokens();
  const std::uint64_t q = cache.descriptors().back().grid.tokens();
  return make_account(tokens, q, cache.d_model(), cache.bytes_per_element());
}

CacheAccount account_uncompressed(const StreamingCache& cache) {
  if (cache.size() == 0) return {};
  const std::uint64_t q = cache.descriptors().back().grid.tokens();
  return make_account(cache.uncompressed_tokens(), q, cache.d_model(), cache.bytes_per_element());
}

TokenGrid compress_token_grid(const TokenGrid& grid, std::size_t factor) {
  return kernels::omp::pool(grid, factor);
}

Mask build_block_causal_mask(std::span<const std::size_t> counts) {
  return kernels::omp::block_causal(counts);
}

Mask build_hybrid_forcing_mask(std::size_t total_blocks, std::size_t noisy_blocks,
                               std::span<const std::size_t> counts) {
  if (noisy_blocks > total_blocks) throw RangeError("K must not exceed B");
  if (counts.size() != total_blocks) throw ShapeError("need one token count per block");
  return kernels::omp::hybrid_forcing(counts, noisy_blocks);
}

CacheConfig parse_cache_config(std::string_view text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(0, err.what());
  }
  CacheConfig cfg;
  try {
    std::vector<std::size_t> factors = cfg.schedule.factors();
    std::size_t window = cfg.schedule.window();
    if (j.contains("factors")) factors = j.at("factors").get<std::vector<std::size_t>>();
    if (j.contains("window")) window = j.at("window").get<std::size_t>();
    cfg.schedule = CompressionSchedule(std::move(factors), window);
    if (j.contains("grid")) {
      const auto g = j.at("grid").get<std::vector<std::size_t>>();
      if (g.size() != 2 || g[0] == 0 || g[1] == 0) throw ConfigError("grid must be [H, W] with H, W >= 1");
      cfg.grid = {g[0], g[1]};
    }
    if (j.contains("bytes_per_element")) cfg.bytes_per_element = j.at("bytes_per_element").get<std::size_t>();
    if (j.contains("d_model")) cfg.d_model = j.at("d_model").get<std::size_t>();
  } catch (const json::exception& err) {
    throw ConfigError(std::string("bad cache config: ") + err.what());
  }
  if (cfg.bytes_per_element != 1 && cfg.bytes_per_element != 2) {
    throw ConfigError("bytes_per_element must be 1 or 2");
  }
  if (cfg.d_model == 0) throw ConfigError("d_model must be positive");
  return cfg;
}

}  // namespace relicforge
