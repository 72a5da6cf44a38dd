// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <limits>

#include "kernels_detail.hpp"
#include "relicforge/error.hpp"
#include "relicforge/kernels.hpp"

namespace relicforge {

RectMask RectMask::from(const Mask& m) {
  RectMask r{m.size(), m.size(), std::vector<std::uint8_t>(m.size() * m.size())};
  for (std::size_t q = 0; q < m.size(); ++q) {
    for (std::size_t k = 0; k < m.size(); ++k) r.bits[q * m.size() + k] = m(q, k) ? 1 : 0;
  }
  return r;
}

namespace kernels {

std::vector<std::size_t> token_blocks(std::span<const std::size_t> counts) {
  std::vector<std::size_t> owner;
  for (std::size_t b = 0; b < counts.size(); ++b) owner.insert(owner.end(), counts[b], b);
  return owner;
}

namespace serial {

TokenGrid pool(const TokenGrid& grid, std::size_t factor) {
  detail::check_pool_args(grid, factor);
  if (factor == 1) return grid;
  const std::size_t oh = (grid.height + factor - 1) / factor;
  const std::size_t ow = (grid.width + factor - 1) / factor;
  TokenGrid out(oh, ow, grid.channels);
  for (std::size_t oy = 0; oy < oh; ++oy) {
    for (std::size_t ox = 0; ox < ow; ++ox) {
      const std::size_t y1 = std::min(grid.height, (oy + 1) * factor);
      const std::size_t x1 = std::min(grid.width, (ox + 1) * factor);
      const double n = static_cast<double>((y1 - oy * factor) * (x1 - ox * factor));
      for (std::size_t c = 0; c < grid.channels; ++c) {
        double sum = 0.0;
        for (std::size_t y = oy * factor; y < y1; ++y) {
          for (std::size_t x = ox * factor; x < x1; ++x) sum += grid.at(y, x, c);
        }
        out.at(oy, ox, c) = sum / n;
      }
    }
  }
  return out;
}

Mask block_causal(std::span<const std::size_t> counts) {
  detail::check_blocks(counts);
  const auto owner = token_blocks(counts);
  Mask m(owner.size());
  for (std::size_t q = 0; q < owner.size(); ++q) {
    for (std::size_t k = 0; k < owner.size(); ++k) m.set(q, k, owner[k] <= owner[q]);
  }
  return m;
}

Mask hybrid_forcing(std::span<const std::size_t> counts, std::size_t noisy_blocks) {
  detail::check_blocks(counts);
  if (noisy_blocks > counts.size()) throw RangeError("noisy suffix exceeds block count");
  const std::size_t clean = counts.size() - noisy_blocks;
  const auto owner = token_blocks(counts);
  Mask m(owner.size());
  for (std::size_t q = 0; q < owner.size(); ++q) {
    for (std::size_t k = 0; k < owner.size(); ++k) {
      const bool q_clean = owner[q] < clean;
      const bool k_clean = owner[k] < clean;
      m.set(q, k, q_clean ? k_clean : (k_clean || owner[k] <= owner[q]));
    }
  }
  return m;
}

Matrix attend(const Matrix& q, const Matrix& k, const Matrix& v, const RectMask& mask,
              std::size_t n_heads) {
  detail::check_attend_args(q, k, v, mask, n_heads);
  const std::size_t head_dim = static_cast<std::size_t>(q.cols()) / n_heads;
  const Matrix qn = detail::normalize_heads(q, n_heads);
  const Matrix kn = detail::normalize_heads(k, n_heads);
  Matrix out = Matrix::Zero(q.rows(), v.cols());
  std::vector<double> scores(static_cast<std::size_t>(k.rows()));
  for (std::size_t h = 0; h < n_heads; ++h) {
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      detail::attend_row(qn, kn, v, mask, h, head_dim, i, scores, out);
    }
  }
  return out;
}

}  // namespace serial
}  // namespace kernels
}  // namespace relicforge
