// Copyright 2026 The relicforge Authors
// SPDX-License-Identifier: Apache-2.0

#include "relicforge/autodiff.hpp"

#include <algorithm>

#include "relicforge/error.hpp"

namespace relicforge {

Tape::Var Tape::push(Node node) {
  footprint_ += 2 * static_cast<std::size_t>(node.value.size());
  nodes_.push_back(std::move(node));
  peak_nodes_ = std::max(peak_nodes_, nodes_.size());
  peak_footprint_ = std::max(peak_footprint_, footprint_);
  return {nodes_.size() - 1};
}

Tape::Var Tape::parameter(double value) {
  return push({Op::kLeaf, 0, 0, true, Value::Constant(1, value), Value::Zero(1)});
}

Tape::Var Tape::constant(Value value) {
  const auto n = value.size();
  return push({Op::kLeaf, 0, 0, false, std::move(value), Value::Zero(n)});
}

Tape::Var Tape::scale(Var scalar, Var vec) {
  const Value& s = nodes_[scalar.id].value;
  if (s.size() != 1) throw ShapeError("scale expects a scalar");
  Value out = s[0] * nodes_[vec.id].value;
  const auto n = out.size();
  const bool g = nodes_[scalar.id].needs_grad || nodes_[vec.id].needs_grad;
  return push({Op::kScale, scalar.id, vec.id, g, std::move(out), Value::Zero(n)});
}

Tape::Var Tape::add(Var a, Var b) {
  if (nodes_[a.id].value.size() != nodes_[b.id].value.size()) throw ShapeError("add size mismatch");
  Value out = nodes_[a.id].value + nodes_[b.id].value;
  const auto n = out.size();
  const bool g = nodes_[a.id].needs_grad || nodes_[b.id].needs_grad;
  return push({Op::kAdd, a.id, b.id, g, std::move(out), Value::Zero(n)});
}

Tape::Var Tape::add_scalar(Var vec, Var scalar) {
  if (nodes_[scalar.id].value.size() != 1) throw ShapeError("add_scalar expects a scalar");
  Value out = nodes_[vec.id].value.array() + nodes_[scalar.id].value[0];
  const auto n = out.size();
  const bool g = nodes_[vec.id].needs_grad || nodes_[scalar.id].needs_grad;
  return push({Op::kAddScalar, vec.id, scalar.id, g, std::move(out), Value::Zero(n)});
}

void Tape::backward(std::span<const std::pair<Var, Value>> seeds) {
  for (const auto& [var, seed] : seeds) {
    if (seed.size() != nodes_[var.id].value.size()) throw ShapeError("seed size mismatch");
    nodes_[var.id].adjoint += seed;
  }
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.needs_grad) continue;
    switch (n.op) {
      case Op::kLeaf:
        break;
      case Op::kScale: {
        Node& s = nodes_[n.lhs];
        Node& x = nodes_[n.rhs];
        if (s.needs_grad) s.adjoint[0] += n.adjoint.dot(x.value);
        if (x.needs_grad) x.adjoint += s.value[0] * n.adjoint;
        break;
      }
      case Op::kAdd:
        if (nodes_[n.lhs].needs_grad) nodes_[n.lhs].adjoint += n.adjoint;
        if (nodes_[n.rhs].needs_grad) nodes_[n.rhs].adjoint += n.adjoint;
        break;
      case Op::kAddScalar:
        if (nodes_[n.lhs].needs_grad) nodes_[n.lhs].adjoint += n.adjoint;
        if (nodes_[n.rhs].needs_grad) nodes_[n.rhs].adjoint[0] += n.adjoint.sum();
        break;
    }
  }
}

void Tape::clear() {
  nodes_.clear();
  footprint_ = 0;
}

}  // namespace relicforge
