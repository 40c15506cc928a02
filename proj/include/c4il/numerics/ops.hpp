#pragma once

#include <span>
#include <vector>

#include "c4il/numerics/tape.hpp"

namespace c4il {

// Differentiable operations recorded on a Tape. Every op validates shapes
// up front and throws ShapeError naming both operands.

Var matmul(Tape& tape, Var a, Var b);

/// x (n x k) plus a 1 x k bias broadcast over rows.
Var add_row(Tape& tape, Var x, Var bias);

Var relu(Tape& tape, Var x);

/// Row-wise l2 normalization; the Jacobian per row is (I - g g^T) / |v|.
Var l2_normalize(Tape& tape, Var x);

/// Row-wise softmax.
Var softmax(Tape& tape, Var logits);

/// Sum over rows of -log(max(p[target], eps)). Chained after softmax the
/// gradient wrt the logits reduces to probs - onehot(target).
Var cross_entropy(Tape& tape, Var probs, std::span<const int> targets);

/// Sum over rows of logsumexp(z_i) - z_i[target], computed from logits so
/// the gradient softmax(z) - onehot(target) never vanishes to underflow.
Var softmax_cross_entropy(Tape& tape, Var logits, std::span<const int> targets);

/// Mean of squared elementwise differences (1x1).
Var mse(Tape& tape, Var a, Var b);

/// Per-row mean squared difference, summed over rows (1x1).
Var row_mse_sum(Tape& tape, Var a, Var b);

/// Squared Frobenius distance |a - b|^2 (1x1).
Var squared_distance(Tape& tape, Var a, Var b);

Var sum(Tape& tape, Var x);
Var scale(Tape& tape, Var x, double factor);
Var add(Tape& tape, Var a, Var b);

Var concat_cols(Tape& tape, std::span<const Var> parts);
Var slice_cols(Tape& tape, Var x, Eigen::Index begin, Eigen::Index count);
Var concat_rows(Tape& tape, std::span<const Var> parts);
Var slice_rows(Tape& tape, Var x, Eigen::Index begin, Eigen::Index count);

// Value-level counterparts used outside training.

/// -log(max(probs[target], eps)) for a single probability row.
double cross_entropy_value(const Matrix& probs_row, int target);
double mse_value(const Matrix& a, const Matrix& b);

}  // namespace c4il
