#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "c4il/numerics/matrix.hpp"

namespace c4il {

/// Handle to a node on a Tape. Only meaningful for the tape that issued it.
struct Var {
  std::size_t id = 0;
};

/// Reverse-mode gradient tape.
///
/// Nodes are appended in evaluation order, so inputs always precede the nodes
/// that consume them. backward() walks the prefix ending at the root once, in
/// reverse, calling each node's closure with its accumulated output gradient.
/// A tape is meant to live for a single batch and then be discarded.
class Tape {
 public:
  /// Receives the node's output gradient and accumulates into its inputs.
  using Backward = std::function<void(Tape&, const Matrix&)>;

  /// Leaf node. Gradients are collected for it only when `requires_grad`.
  Var leaf(Matrix value, bool requires_grad = true);
  Var constant(Matrix value) { return leaf(std::move(value), false); }

  /// Interior node. `backward` may be empty for nodes that need no gradient.
  Var record(Matrix value, std::vector<Var> inputs, Backward backward);

  const Matrix& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;

  /// Gradient accumulated into `v` by the last backward(); zeros when none reached it.
  Matrix grad(Var v) const;

  bool requires_grad(Var v) const { return nodes_.at(v.id).requires_grad; }

  /// Adds `g` into the gradient slot of `v` (no-op when v needs no gradient).
  void accumulate(Var v, const Matrix& g);

  /// Seeds d(root)/d(root) = 1 and propagates. The root must be 1x1.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    std::vector<Var> inputs;
    Backward backward;
    bool requires_grad = false;
    Matrix grad;  // empty until something flows in
  };
  std::vector<Node> nodes_;
};

}  // namespace c4il
