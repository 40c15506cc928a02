#include "c4il/numerics/tape.hpp"

#include <string>

namespace c4il {

Var Tape::leaf(Matrix value, bool requires_grad) {
  require_finite(value, "tape leaf");
  nodes_.push_back(Node{std::move(value), {}, {}, requires_grad, {}});
  return Var{nodes_.size() - 1};
}

Var Tape::record(Matrix value, std::vector<Var> inputs, Backward backward) {
  require_finite(value, "tape node");
  bool needs = false;
  for (Var in : inputs) {
    if (in.id >= nodes_.size()) throw std::logic_error("tape: input recorded after its consumer");
    needs = needs || nodes_[in.id].requires_grad;
  }
  needs = needs && static_cast<bool>(backward);
  nodes_.push_back(Node{std::move(value), std::move(inputs), std::move(backward), needs, {}});
  return Var{nodes_.size() - 1};
}

double Tape::scalar(Var v) const {
  const Matrix& m = value(v);
  if (m.rows() != 1 || m.cols() != 1) throw ShapeError("tape: expected 1x1 scalar, got " + shape_of(m));
  return m(0, 0);
}

Matrix Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.size() == 0) return Matrix::Zero(n.value.rows(), n.value.cols());
  return n.grad;
}

void Tape::accumulate(Var v, const Matrix& g) {
  Node& n = nodes_.at(v.id);
  if (!n.requires_grad) return;
  if (g.rows() != n.value.rows() || g.cols() != n.value.cols()) {
    throw ShapeError("tape: gradient " + shape_of(g) + " does not match value " + shape_of(n.value));
  }
  if (n.grad.size() == 0) {
    n.grad = g;
  } else {
    n.grad += g;
  }
}

void Tape::backward(Var root) {
  if (scalar(root) != scalar(root)) throw NonFiniteError("tape: NaN root");
  for (Node& n : nodes_) n.grad.resize(0, 0);
  Node& r = nodes_.at(root.id);
  if (!r.requires_grad) return;
  r.grad = Matrix::Ones(1, 1);
  for (std::size_t i = root.id + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (!n.backward || n.grad.size() == 0) continue;
    const Matrix g = n.grad;
    n.backward(*this, g);
  }
}

}  // namespace c4il
