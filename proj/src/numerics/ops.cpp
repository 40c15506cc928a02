#include "c4il/numerics/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace c4il {

Var matmul(Tape& tape, Var a, Var b) {
  const Matrix& av = tape.value(a);
  const Matrix& bv = tape.value(b);
  if (av.cols() != bv.rows()) {
    throw ShapeError("matmul: inner dimensions differ " + shape_of(av) + " * " + shape_of(bv));
  }
  Matrix out = av * bv;
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    if (t.requires_grad(a)) t.accumulate(a, g * t.value(b).transpose());
    if (t.requires_grad(b)) t.accumulate(b, t.value(a).transpose() * g);
  });
}

Var add_row(Tape& tape, Var x, Var bias) {
  const Matrix& xv = tape.value(x);
  const Matrix& bv = tape.value(bias);
  if (bv.rows() != 1 || bv.cols() != xv.cols()) {
    throw ShapeError("add_row: bias " + shape_of(bv) + " does not broadcast over " + shape_of(xv));
  }
  Matrix out = xv.rowwise() + bv.row(0);
  return tape.record(std::move(out), {x, bias}, [x, bias](Tape& t, const Matrix& g) {
    t.accumulate(x, g);
    if (t.requires_grad(bias)) t.accumulate(bias, g.colwise().sum());
  });
}

Var relu(Tape& tape, Var x) {
  Matrix out = tape.value(x).cwiseMax(0.0);
  return tape.record(std::move(out), {x}, [x](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(x);
    t.accumulate(x, (xv.array() > 0.0).select(g, 0.0));
  });
}

Var l2_normalize(Tape& tape, Var x) {
  Matrix out = l2_normalized_rows(tape.value(x));
  const Var result{tape.size()};  // id the record below will receive
  return tape.record(std::move(out), {x}, [x, result](Tape& t, const Matrix& g) {
    const Matrix& xv = t.value(x);
    const Matrix& gamma = t.value(result);
    Matrix dx(xv.rows(), xv.cols());
    for (Eigen::Index i = 0; i < xv.rows(); ++i) {
      const double n = xv.row(i).norm();
      const double proj = g.row(i).dot(gamma.row(i));
      dx.row(i) = (g.row(i) - proj * gamma.row(i)) / n;
    }
    t.accumulate(x, dx);
  });
}

Var softmax(Tape& tape, Var logits) {
  Matrix out = softmax_rows(tape.value(logits));
  const Var probs{tape.size()};
  return tape.record(std::move(out), {logits}, [logits, probs](Tape& t, const Matrix& g) {
    const Matrix& p = t.value(probs);
    // dz = p * (g - <g, p>) row-wise
    const Eigen::VectorXd inner = (g.array() * p.array()).rowwise().sum();
    Matrix dz = p.array() * (g.array().colwise() - inner.array());
    t.accumulate(logits, dz);
  });
}

Var cross_entropy(Tape& tape, Var probs, std::span<const int> targets) {
  const Matrix& p = tape.value(probs);
  if (static_cast<Eigen::Index>(targets.size()) != p.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for probs " +
                     shape_of(p));
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < p.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    if (y < 0 || y >= p.cols()) {
      throw LabelError("cross_entropy: target " + std::to_string(y) + " outside [0, " +
                       std::to_string(p.cols()) + ")");
    }
    loss += -std::log(std::max(p(i, y), kProbEpsilon));
  }
  std::vector<int> ys(targets.begin(), targets.end());
  return tape.record(Matrix::Constant(1, 1, loss), {probs},
                     [probs, ys = std::move(ys)](Tape& t, const Matrix& g) {
                       const Matrix& pv = t.value(probs);
                       Matrix dp = Matrix::Zero(pv.rows(), pv.cols());
                       for (Eigen::Index i = 0; i < pv.rows(); ++i) {
                         const double pi = pv(i, ys[static_cast<std::size_t>(i)]);
                         // The clamp is flat below eps, so no gradient flows there.
                         if (pi > kProbEpsilon) dp(i, ys[static_cast<std::size_t>(i)]) = -g(0, 0) / pi;
                       }
                       t.accumulate(probs, dp);
                     });
}

Var softmax_cross_entropy(Tape& tape, Var logits, std::span<const int> targets) {
  const Matrix& z = tape.value(logits);
  if (static_cast<Eigen::Index>(targets.size()) != z.rows()) {
    throw ShapeError("cross_entropy: " + std::to_string(targets.size()) + " targets for logits " + shape_of(z));
  }
  double loss = 0.0;
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    const int y = targets[static_cast<std::size_t>(i)];
    if (y < 0 || y >= z.cols()) {
      throw LabelError("cross_entropy: target " + std::to_string(y) + " outside [0, " + std::to_string(z.cols()) +
                       ")");
    }
    const double top = z.row(i).maxCoeff();
    loss += top + std::log((z.row(i).array() - top).exp().sum()) - z(i, y);
  }
  std::vector<int> ys(targets.begin(), targets.end());
  return tape.record(Matrix::Constant(1, 1, loss), {logits},
                     [logits, ys = std::move(ys)](Tape& t, const Matrix& g) {
                       Matrix d = softmax_rows(t.value(logits));
                       for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, ys[static_cast<std::size_t>(i)]) -= 1.0;
                       t.accumulate(logits, d * g(0, 0));
                     });
}

Var mse(Tape& tape, Var a, Var b) {
  const Matrix& av = tape.value(a);
  const Matrix& bv = tape.value(b);
  require_same_shape(av, bv, "mse");
  if (av.size() == 0) throw ShapeError("mse: empty operands");
  const double n = static_cast<double>(av.size());
  const double loss = (av - bv).squaredNorm() / n;
  return tape.record(Matrix::Constant(1, 1, loss), {a, b}, [a, b, n](Tape& t, const Matrix& g) {
    const Matrix d = (t.value(a) - t.value(b)) * (2.0 * g(0, 0) / n);
    t.accumulate(a, d);
    t.accumulate(b, -d);
  });
}

Var row_mse_sum(Tape& tape, Var a, Var b) {
  const Matrix& av = tape.value(a);
  const Matrix& bv = tape.value(b);
  require_same_shape(av, bv, "row_mse_sum");
  if (av.cols() == 0) throw ShapeError("row_mse_sum: zero columns");
  const double k = static_cast<double>(av.cols());
  const double loss = (av - bv).squaredNorm() / k;
  return tape.record(Matrix::Constant(1, 1, loss), {a, b}, [a, b, k](Tape& t, const Matrix& g) {
    const Matrix d = (t.value(a) - t.value(b)) * (2.0 * g(0, 0) / k);
    t.accumulate(a, d);
    t.accumulate(b, -d);
  });
}

Var squared_distance(Tape& tape, Var a, Var b) {
  require_same_shape(tape.value(a), tape.value(b), "squared_distance");
  const double loss = (tape.value(a) - tape.value(b)).squaredNorm();
  return tape.record(Matrix::Constant(1, 1, loss), {a, b}, [a, b](Tape& t, const Matrix& g) {
    const Matrix d = (t.value(a) - t.value(b)) * (2.0 * g(0, 0));
    t.accumulate(a, d);
    t.accumulate(b, -d);
  });
}

Var sum(Tape& tape, Var x) {
  const Matrix& xv = tape.value(x);
  const Eigen::Index rows = xv.rows();
  const Eigen::Index cols = xv.cols();
  return tape.record(Matrix::Constant(1, 1, xv.sum()), {x}, [x, rows, cols](Tape& t, const Matrix& g) {
    t.accumulate(x, Matrix::Constant(rows, cols, g(0, 0)));
  });
}

Var scale(Tape& tape, Var x, double factor) {
  Matrix out = tape.value(x) * factor;
  return tape.record(std::move(out), {x},
                     [x, factor](Tape& t, const Matrix& g) { t.accumulate(x, g * factor); });
}

Var add(Tape& tape, Var a, Var b) {
  require_same_shape(tape.value(a), tape.value(b), "add");
  Matrix out = tape.value(a) + tape.value(b);
  return tape.record(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
    t.accumulate(a, g);
    t.accumulate(b, g);
  });
}

Var concat_cols(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_cols: no operands");
  const Eigen::Index rows = tape.value(parts[0]).rows();
  Eigen::Index cols = 0;
  for (Var p : parts) {
    if (tape.value(p).rows() != rows) {
      throw ShapeError("concat_cols: row mismatch " + shape_of(tape.value(parts[0])) + " vs " +
                       shape_of(tape.value(p)));
    }
    cols += tape.value(p).cols();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = tape.value(p);
    out.middleCols(at, v.cols()) = v;
    at += v.cols();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(std::move(out), inputs, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index offset = 0;
    for (Var p : inputs) {
      const Eigen::Index c = t.value(p).cols();
      if (t.requires_grad(p)) t.accumulate(p, g.middleCols(offset, c));
      offset += c;
    }
  });
}

Var slice_cols(Tape& tape, Var x, Eigen::Index begin, Eigen::Index count) {
  const Matrix& xv = tape.value(x);
  if (begin < 0 || count < 0 || begin + count > xv.cols()) {
    throw ShapeError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_of(xv));
  }
  Matrix out = xv.middleCols(begin, count);
  return tape.record(std::move(out), {x}, [x, begin, count](Tape& t, const Matrix& g) {
    Matrix dx = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
    dx.middleCols(begin, count) = g;
    t.accumulate(x, dx);
  });
}

Var concat_rows(Tape& tape, std::span<const Var> parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no operands");
  const Eigen::Index cols = tape.value(parts[0]).cols();
  Eigen::Index rows = 0;
  for (Var p : parts) {
    if (tape.value(p).cols() != cols) {
      throw ShapeError("concat_rows: column mismatch " + shape_of(tape.value(parts[0])) + " vs " +
                       shape_of(tape.value(p)));
    }
    rows += tape.value(p).rows();
  }
  Matrix out(rows, cols);
  Eigen::Index at = 0;
  for (Var p : parts) {
    const Matrix& v = tape.value(p);
    out.middleRows(at, v.rows()) = v;
    at += v.rows();
  }
  std::vector<Var> inputs(parts.begin(), parts.end());
  return tape.record(std::move(out), inputs, [inputs](Tape& t, const Matrix& g) {
    Eigen::Index offset = 0;
    for (Var p : inputs) {
      const Eigen::Index r = t.value(p).rows();
      if (t.requires_grad(p)) t.accumulate(p, g.middleRows(offset, r));
      offset += r;
    }
  });
}

Var slice_rows(Tape& tape, Var x, Eigen::Index begin, Eigen::Index count) {
  const Matrix& xv = tape.value(x);
  if (begin < 0 || count < 0 || begin + count > xv.rows()) {
    throw ShapeError("slice_rows: range [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                     ") outside " + shape_of(xv));
  }
  Matrix out = xv.middleRows(begin, count);
  return tape.record(std::move(out), {x}, [x, begin, count](Tape& t, const Matrix& g) {
    Matrix dx = Matrix::Zero(t.value(x).rows(), t.value(x).cols());
    dx.middleRows(begin, count) = g;
    t.accumulate(x, dx);
  });
}

double cross_entropy_value(const Matrix& probs_row, int target) {
  if (probs_row.rows() != 1) throw ShapeError("cross_entropy: expected one row, got " + shape_of(probs_row));
  if (target < 0 || target >= probs_row.cols()) {
    throw LabelError("cross_entropy: target " + std::to_string(target) + " outside [0, " +
                     std::to_string(probs_row.cols()) + ")");
  }
  return -std::log(std::max(probs_row(0, target), kProbEpsilon));
}

double mse_value(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "mse");
  if (a.size() == 0) throw ShapeError("mse: empty operands");
  return (a - b).squaredNorm() / static_cast<double>(a.size());
}

}  // namespace c4il
