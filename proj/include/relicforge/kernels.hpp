// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

// Data-parallel inner loops. Every kernel has a plain serial reference and an
// OpenMP version; both compute each output element with the same arithmetic
// in the same order, so their results are bitwise identical.

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace relicforge {

/// H x W x D tokens, row-major with the channel index fastest.
struct TokenGrid {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::vector<double> values;

  TokenGrid() = default;
  TokenGrid(std::size_t h, std::size_t w, std::size_t d, double fill = 0.0)
      : height(h), width(w), channels(d), values(h * w * d, fill) {}

  std::size_t tokens() const noexcept { return height * width; }
  double& at(std::size_t y, std::size_t x, std::size_t c) {
    return values[(y * width + x) * channels + c];
  }
  double at(std::size_t y, std::size_t x, std::size_t c) const {
    return values[(y * width + x) * channels + c];
  }
  bool operator==(const TokenGrid&) const = default;
};

/// Square boolean attention mask; entry (q, k) is true when query q may
/// attend key k.
class Mask {
 public:
  Mask() = default;
  explicit Mask(std::size_t n, bool fill = false) : n_(n), bits_(n * n, fill ? 1 : 0) {}

  std::size_t size() const noexcept { return n_; }
  bool operator()(std::size_t q, std::size_t k) const { return bits_[q * n_ + k] != 0; }
  void set(std::size_t q, std::size_t k, bool v) { bits_[q * n_ + k] = v ? 1 : 0; }
  std::uint8_t* row(std::size_t q) { return bits_.data() + q * n_; }
  const std::uint8_t* row(std::size_t q) const { return bits_.data() + q * n_; }
  bool operator==(const Mask&) const = default;

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Dense rectangular mask for attention where queries and keys differ in
/// count (streaming steps). Row-major, queries x keys.
struct RectMask {
  std::size_t queries = 0;
  std::size_t keys = 0;
  std::vector<std::uint8_t> bits;
  static RectMask all(std::size_t q, std::size_t k) { return {q, k, std::vector<std::uint8_t>(q * k, 1)}; }
  static RectMask from(const Mask& m);
  bool operator()(std::size_t q, std::size_t k) const { return bits[q * keys + k] != 0; }
};

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace kernels {

/// Block index owning each token.
std::vector<std::size_t> token_blocks(std::span<const std::size_t> block_token_counts);

namespace serial {

TokenGrid pool(const TokenGrid& grid, std::size_t factor);
Mask block_causal(std::span<const std::size_t> block_token_counts);
Mask hybrid_forcing(std::span<const std::size_t> block_token_counts, std::size_t noisy_blocks);
Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              std::size_t n_heads);

}  // namespace serial

namespace omp {

TokenGrid pool(const TokenGrid& grid, std::size_t factor);
Mask block_causal(std::span<const std::size_t> block_token_counts);
Mask hybrid_forcing(std::span<const std::size_t> block_token_counts, std::size_t noisy_blocks);
Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              std::size_t n_heads);

}  // namespace omp

/// Caps the OpenMP team size from RELICFORGE_THREADS when set.
void configure_threads_from_env();
int max_threads();

}  // namespace kernels
}  // namespace relicforge
