// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "relicforge/error.hpp"
#include "relicforge/kernels.hpp"

namespace relicforge::kernels::detail {

inline void check_pool_args(const TokenGrid& grid, std::size_t factor) {
  if (factor != 1 && factor != 2 && factor != 4) {
    throw ConfigError("pooling factor must be 1, 2 or 4");
  }
  if (grid.values.size() != grid.height * grid.width * grid.channels) {
    throw ShapeError("token grid storage does not match its shape");
  }
}

inline void check_blocks(std::span<const std::size_t> counts) {
  if (counts.empty()) throw ValidationError("block list is empty");
  for (const auto c : counts) {
    if (c == 0) throw ValidationError("block token counts must be positive");
  }
}

inline void check_attend_args(const Matrix& q, const Matrix& k, const Matrix& v,
                              const RectMask& mask, std::size_t n_heads) {
  if (n_heads == 0 || q.cols() % static_cast<Eigen::Index>(n_heads) != 0) {
    throw ShapeError("model width is not divisible by the head count");
  }
  if (k.cols() != q.cols() || v.cols() != q.cols()) throw ShapeError("q/k/v widths differ");
  if (k.rows() != v.rows()) throw ShapeError("key and value counts differ");
  if (mask.queries != static_cast<std::size_t>(q.rows()) ||
      mask.keys != static_cast<std::size_t>(k.rows()) ||
      mask.bits.size() != mask.queries * mask.keys) {
    throw ShapeError("mask does not cover all query/key pairs");
  }
}

/// QK-norm: every head slice scaled to unit L2 norm; zero slices stay zero.
inline Matrix normalize_heads(const Matrix& x, std::size_t n_heads) {
  const Eigen::Index hd = x.cols() / static_cast<Eigen::Index>(n_heads);
  Matrix out = x;
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    for (Eigen::Index h = 0; h < static_cast<Eigen::Index>(n_heads); ++h) {
      auto seg = out.row(i).segment(h * hd, hd);
      const double n = seg.norm();
      if (n > 0.0) seg /= n;
    }
  }
  return out;
}

/// One (head, query) row of masked softmax attention. `scores` is scratch of
/// size k.rows(). Fully masked rows leave the output at zero.
inline void attend_row(const Matrix& qn, const Matrix& kn, const Matrix& v, const RectMask& mask,
                       std::size_t head, std::size_t head_dim, Eigen::Index i,
                       std::vector<double>& scores, Matrix& out) {
  const Eigen::Index off = static_cast<Eigen::Index>(head * head_dim);
  const Eigen::Index hd = static_cast<Eigen::Index>(head_dim);
  const double scale = 1.0 / std::sqrt(static_cast<double>(head_dim));
  const auto qrow = qn.row(i).segment(off, hd);
  double best = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (Eigen::Index j = 0; j < kn.rows(); ++j) {
    if (!mask(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
    double s = 0.0;
    for (Eigen::Index c = 0; c < hd; ++c) s += qrow[c] * kn(j, off + c);
    s *= scale;
    scores[static_cast<std::size_t>(j)] = s;
    if (s > best) best = s;
    any = true;
  }
  if (!any) return;
  double total = 0.0;
  for (Eigen::Index j = 0; j < kn.rows(); ++j) {
    if (!mask(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
    const double w = std::exp(scores[static_cast<std::size_t>(j)] - best);
    scores[static_cast<std::size_t>(j)] = w;
    total += w;
  }
  for (Eigen::Index j = 0; j < kn.rows(); ++j) {
    if (!mask(static_cast<std::size_t>(i), static_cast<std::size_t>(j))) continue;
    const double w = scores[static_cast<std::size_t>(j)] / total;
    for (Eigen::Index c = 0; c < hd; ++c) out(i, off + c) += w * v(j, off + c);
  }
}

}  // namespace relicforge::kernels::detail
