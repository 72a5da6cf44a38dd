// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace relicforge {

/// Minimal reverse-mode tape over vector values. Scalars are length-1
/// vectors. Only the handful of ops the affine toy generator needs.
class Tape {
 public:
  using Value = Eigen::VectorXd;

  struct Var {
    std::size_t id;
  };

  /// A differentiable leaf.
  Var parameter(double value);
  /// A leaf that never receives gradient (used for stop-gradient contexts).
  Var constant(Value value);

  /// scalar * vector
  Var scale(Var scalar, Var vec);
  Var add(Var a, Var b);
  /// vector + scalar broadcast
  Var add_scalar(Var vec, Var scalar);

  const Value& value(Var v) const { return nodes_[v.id].value; }
  double grad(Var v) const { return nodes_[v.id].adjoint.size() ? nodes_[v.id].adjoint[0] : 0.0; }

  /// Seeds each listed node's adjoint with the given vector and propagates
  /// to the leaves in reverse creation order.
  void backward(std::span<const std::pair<Var, Value>> seeds);

  /// Drops every node; the peak counters survive.
  void clear();

  std::size_t size() const noexcept { return nodes_.size(); }
  /// Doubles held by values and adjoints.
  std::size_t footprint() const noexcept { return footprint_; }
  std::size_t peak_nodes() const noexcept { return peak_nodes_; }
  std::size_t peak_footprint() const noexcept { return peak_footprint_; }

 private:
  enum class Op { kLeaf, kScale, kAdd, kAddScalar };
  struct Node {
    Op op;
    std::size_t lhs = 0;
    std::size_t rhs = 0;
    bool needs_grad = false;
    Value value;
    Value adjoint;
  };

  Var push(Node node);

  std::vector<Node> nodes_;
  std::size_t footprint_ = 0;
  std::size_t peak_nodes_ = 0;
  std::size_t peak_footprint_ = 0;
};

}  // namespace relicforge
