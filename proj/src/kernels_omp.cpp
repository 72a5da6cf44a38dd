// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <omp.h>

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <string>

#include "kernels_detail.hpp"
#include "relicforge/error.hpp"
#include "relicforge/kernels.hpp"

namespace relicforge::kernels {

void configure_threads_from_env() {
  const char* env = std::getenv("RELICFORGE_THREADS");
  if (env == nullptr || *env == '\0') return;
  char* end = nullptr;
  const long n = std::strtol(env, &end, 10);
  if (*end != '\0' || n < 1) throw ConfigError("RELICFORGE_THREADS must be a positive integer");
  omp_set_num_threads(static_cast<int>(std::min<long>(n, omp_get_num_procs() * 4L)));
}

int max_threads() { return omp_get_max_threads(); }

namespace omp {

TokenGrid pool(const TokenGrid& grid, std::size_t factor) {
  detail::check_pool_args(grid, factor);
  if (factor == 1) return grid;
  const std::size_t oh = (grid.height + factor - 1) / factor;
  const std::size_t ow = (grid.width + factor - 1) / factor;
  const std::size_t d = grid.channels;
  TokenGrid out(oh, ow, d);

  // Accumulate whole channel vectors per input pixel; per-channel summation
  // order is still row-major over the window.
#pragma omp parallel
  {
    std::vector<double> acc(d);
#pragma omp for schedule(static)
    for (std::ptrdiff_t oy = 0; oy < static_cast<std::ptrdiff_t>(oh); ++oy) {
      const std::size_t y0 = static_cast<std::size_t>(oy) * factor;
      const std::size_t y1 = std::min(grid.height, y0 + factor);
      for (std::size_t ox = 0; ox < ow; ++ox) {
        const std::size_t x0 = ox * factor;
        const std::size_t x1 = std::min(grid.width, x0 + factor);
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t y = y0; y < y1; ++y) {
          for (std::size_t x = x0; x < x1; ++x) {
            const double* src = &grid.values[(y * grid.width + x) * d];
            for (std::size_t c = 0; c < d; ++c) acc[c] += src[c];
          }
        }
        const double n = static_cast<double>((y1 - y0) * (x1 - x0));
        double* dst = &out.values[(static_cast<std::size_t>(oy) * ow + ox) * d];
        for (std::size_t c = 0; c < d; ++c) dst[c] = acc[c] / n;
      }
    }
  }
  return out;
}

namespace {

// Allowed keys of a query form at most one contiguous run starting at token
// zero, so each row is a prefix fill.
Mask prefix_mask(std::span<const std::size_t> counts, std::size_t clean_blocks) {
  std::vector<std::size_t> ends(counts.size());
  std::size_t acc = 0;
  for (std::size_t b = 0; b < counts.size(); ++b) ends[b] = acc += counts[b];
  const std::size_t clean_end = clean_blocks == 0 ? 0 : ends[clean_blocks - 1];
  Mask m(acc);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t b = 0; b < static_cast<std::ptrdiff_t>(counts.size()); ++b) {
    const std::size_t bu = static_cast<std::size_t>(b);
    const std::size_t begin = bu == 0 ? 0 : ends[bu - 1];
    const std::size_t visible = bu < clean_blocks ? clean_end : ends[bu];
    for (std::size_t q = begin; q < ends[bu]; ++q) std::memset(m.row(q), 1, visible);
  }
  return m;
}

}  // namespace

Mask block_causal(std::span<const std::size_t> counts) {
  detail::check_blocks(counts);
  return prefix_mask(counts, 0);
}

Mask hybrid_forcing(std::span<const std::size_t> counts, std::size_t noisy_blocks) {
  detail::check_blocks(counts);
  if (noisy_blocks > counts.size()) throw RangeError("noisy suffix exceeds block count");
  return prefix_mask(counts, counts.size() - noisy_blocks);
}

Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              std::size_t n_heads) {
  detail::check_attend_args(q, k, v, mask, n_heads);
  const std::size_t head_dim = static_cast<std::size_t>(q.cols()) / n_heads;
  const Matrix qn = detail::normalize_heads(q, n_heads);
  const Matrix kn = detail::normalize_heads(k, n_heads);
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  const std::ptrdiff_t rows = q.rows();
  const std::ptrdiff_t work = rows * static_cast<std::ptrdiff_t>(n_heads);
#pragma omp parallel
  {
    std::vector<double> scores(static_cast<std::size_t>(k.rows()));
#pragma omp for schedule(static)
    for (std::ptrdiff_t w = 0; w < work; ++w) {
      detail::attend_row(qn, kn, v, mask, static_cast<std::size_t>(w / rows), head_dim, w % rows,
                         scores, out);
    }
  }
  return out;
}

}  // namespace omp
}  // namespace relicforge::kernels
