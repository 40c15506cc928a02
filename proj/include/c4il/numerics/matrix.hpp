#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>

#include "c4il/errors.hpp"

namespace c4il {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using Matrix = MatrixX<double>;
using RowVector = RowVectorX<double>;
using Vector = Eigen::VectorXd;

/// Norms below this are treated as zero by every normalizing operation.
inline constexpr double kNormEpsilon = 1e-12;
/// Probability floor applied before taking a logarithm.
inline constexpr double kProbEpsilon = 1e-12;

template <typename Derived>
std::string shape_of(const Eigen::MatrixBase<Derived>& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteError(std::string(what) + ": non-finite entry");
}

template <typename DA, typename DB>
void require_same_shape(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": shape mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
}

// ---------------------------------------------------------------------------
// Value-level kernels. These carry no gradient; the tape operations and the
// evaluation code both build on them so forward values agree bit for bit.

/// Row-wise l2 normalization. Throws DegenerateVectorError on a row whose norm
/// is at or below kNormEpsilon.
template <typename Derived>
MatrixX<typename Derived::Scalar> l2_normalized_rows(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  MatrixX<Scalar> out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const Scalar n = x.row(i).norm();
    if (!(n > Scalar(kNormEpsilon))) {
      throw DegenerateVectorError("l2_normalize: row " + std::to_string(i) + " has near-zero norm");
    }
    out.row(i) = x.row(i) / n;
  }
  return out;
}

/// Row-wise softmax with max subtraction.
template <typename Derived>
MatrixX<typename Derived::Scalar> softmax_rows(const Eigen::MatrixBase<Derived>& logits) {
  using Scalar = typename Derived::Scalar;
  require_finite(logits, "softmax");
  MatrixX<Scalar> out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Scalar top = logits.row(i).maxCoeff();
    out.row(i) = (logits.row(i).array() - top).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

/// Cosine similarity of two vectors (any orientation, equal size).
template <typename DA, typename DB>
typename DA::Scalar cosine_similarity(const Eigen::MatrixBase<DA>& a,
                                      const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  if (a.size() != b.size()) {
    throw ShapeError("cosine_similarity: size mismatch " + shape_of(a) + " vs " + shape_of(b));
  }
  const Scalar na = a.norm();
  const Scalar nb = b.norm();
  if (!(na > Scalar(kNormEpsilon)) || !(nb > Scalar(kNormEpsilon))) {
    throw DegenerateVectorError("cosine_similarity: zero-norm input");
  }
  Scalar dot = 0;
  for (Eigen::Index k = 0; k < a.size(); ++k) dot += a.reshaped()(k) * b.reshaped()(k);
  return dot / (na * nb);
}

/// Index of the largest entry of each row; ties resolve to the lowest index.
template <typename Derived>
Eigen::VectorXi argmax_rows(const Eigen::MatrixBase<Derived>& x) {
  Eigen::VectorXi out(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index j = 1; j < x.cols(); ++j) {
      if (x(i, j) > x(i, best)) best = j;
    }
    out(i) = static_cast<int>(best);
  }
  return out;
}

}  // namespace c4il
