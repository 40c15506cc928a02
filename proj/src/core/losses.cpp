#include "c4il/core/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "c4il/numerics/ops.hpp"

namespace c4il {

std::vector<int> stacked_twins(std::size_t batch_size) {
  std::vector<int> twins(2 * batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    twins[i] = static_cast<int>(i + batch_size);
    twins[i + batch_size] = static_cast<int>(i);
  }
  return twins;
}

std::vector<int> positive_set(int anchor, std::span<const int> labels, std::span<const int> twins,
                              bool label_guidance) {
  if (twins.size() != labels.size()) {
    throw ShapeError("positive_set: " + std::to_string(twins.size()) + " twins for " +
                     std::to_string(labels.size()) + " labels");
  }
  const auto n = static_cast<int>(labels.size());
  if (anchor < 0 || anchor >= n) throw LabelError("positive_set: anchor outside the batch");
  std::vector<int> out;
  const int twin = twins[static_cast<std::size_t>(anchor)];
  for (int j = 0; j < n; ++j) {
    if (j == anchor) continue;
    const bool same_class = label_guidance && labels[static_cast<std::size_t>(j)] == labels[static_cast<std::size_t>(anchor)];
    if (j == twin || same_class) out.push_back(j);
  }
  return out;
}

namespace {

struct ContrastiveEval {
  double loss = 0.0;
  Matrix d_sim;  // dL/dS, only when requested
};

// Core of the contrastive loss on unit-norm rows `gamma`.
ContrastiveEval contrastive_core(const Matrix& gamma, std::span<const int> labels, std::span<const int> twins,
                                 bool label_guidance, bool want_grad) {
  const Eigen::Index n = gamma.rows();
  if (static_cast<Eigen::Index>(labels.size()) != n || static_cast<Eigen::Index>(twins.size()) != n) {
    throw ShapeError("l_con: " + std::to_string(labels.size()) + " labels and " + std::to_string(twins.size()) +
                     " twins for " + std::to_string(n) + " rows");
  }
  // Three rows is the smallest batch where an anchor can have a positive and a negative.
  if (n < 3) throw ShapeError("l_con: need at least 3 rows, got " + std::to_string(n));
  const Matrix sim = gamma * gamma.transpose();

  std::vector<std::vector<int>> positives(static_cast<std::size_t>(n));
  std::size_t anchors = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    positives[static_cast<std::size_t>(i)] = positive_set(static_cast<int>(i), labels, twins, label_guidance);
    if (!positives[static_cast<std::size_t>(i)].empty()) ++anchors;
  }
  if (anchors == 0) throw ConfigError("l_con: no anchor has a positive; the contrastive loss needs positives");

  ContrastiveEval out;
  if (want_grad) out.d_sim = Matrix::Zero(n, n);
  const double inv_anchors = 1.0 / static_cast<double>(anchors);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& pos = positives[static_cast<std::size_t>(i)];
    if (pos.empty()) continue;
    // log mean_{d != i} exp(s_id), stabilized by the row max.
    double top = -std::numeric_limits<double>::infinity();
    for (Eigen::Index d = 0; d < n; ++d) {
      if (d != i) top = std::max(top, sim(i, d));
    }
    double denom = 0.0;
    for (Eigen::Index d = 0; d < n; ++d) {
      if (d != i) denom += std::exp(sim(i, d) - top);
    }
    const double log_mean_exp = top + std::log(denom / static_cast<double>(n - 1));
    double pos_sum = 0.0;
    for (int p : pos) pos_sum += sim(i, p);
    const double inv_pos = 1.0 / static_cast<double>(pos.size());
    out.loss += (log_mean_exp - pos_sum * inv_pos) * inv_anchors;

    if (want_grad) {
      for (Eigen::Index d = 0; d < n; ++d) {
        if (d != i) out.d_sim(i, d) += std::exp(sim(i, d) - top) / denom * inv_anchors;
      }
      for (int p : pos) out.d_sim(i, p) -= inv_pos * inv_anchors;
    }
  }
  return out;
}

}  // namespace

Var l_con(Tape& tape, Var reps, std::span<const int> labels, std::span<const int> twins, bool label_guidance) {
  const Var gamma = l2_normalize(tape, reps);
  std::vector<int> ys(labels.begin(), labels.end());
  std::vector<int> tw(twins.begin(), twins.end());
  ContrastiveEval eval = contrastive_core(tape.value(gamma), ys, tw, label_guidance, true);
  Matrix d_sim = std::move(eval.d_sim);
  return tape.record(Matrix::Constant(1, 1, eval.loss), {gamma},
                     [gamma, d_sim = std::move(d_sim)](Tape& t, const Matrix& g) {
                       // S = G G^T  =>  dG = (dS + dS^T) G
                       t.accumulate(gamma, g(0, 0) * ((d_sim + d_sim.transpose()) * t.value(gamma)));
                     });
}

double l_con_value(const Matrix& reps, std::span<const int> labels, std::span<const int> twins,
                   bool label_guidance) {
  return contrastive_core(l2_normalized_rows(reps), labels, twins, label_guidance, false).loss;
}

Var l_rld(Tape& tape, Var current_reps, const Matrix& previous_reps) {
  require_same_shape(tape.value(current_reps), previous_reps, "l_rld");
  const Var gamma = l2_normalize(tape, current_reps);
  const Var previous = tape.constant(l2_normalized_rows(previous_reps));
  return squared_distance(tape, gamma, previous);
}

Var l_kd(Tape& tape, Var current_old_logits, const Matrix& previous_old_probs) {
  require_same_shape(tape.value(current_old_logits), previous_old_probs, "l_kd");
  const Var probs = softmax(tape, current_old_logits);
  const Var previous = tape.constant(previous_old_probs);
  return row_mse_sum(tape, probs, previous);
}

Var l_ce(Tape& tape, Var logits, std::span<const int> target_columns) {
  return softmax_cross_entropy(tape, logits, target_columns);
}

}  // namespace c4il
