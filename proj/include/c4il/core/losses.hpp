#pragma once

#include <span>
#include <vector>

#include "c4il/numerics/tape.hpp"

namespace c4il {

/// Twin index per row of an augmented batch; kNoTwin when a row has none.
inline constexpr int kNoTwin = -1;

/// Twin mapping for a 2B batch laid out as [originals; augmented views]:
/// row i and row i + B are each other's twin.
std::vector<int> stacked_twins(std::size_t batch_size);

/// Positives of anchor i: its twin plus, with label guidance, every other
/// row sharing its label. Sorted, never contains i.
std::vector<int> positive_set(int anchor, std::span<const int> labels, std::span<const int> twins,
                              bool label_guidance = true);

/// Contrastive class concentration loss over a 2B x m representation batch.
///
/// For each anchor i with non-empty positive set P(i):
///   term_i = mean_{p in P(i)} -log( exp(s_ip) / mean_{d != i} exp(s_id) )
/// with s the cosine similarity. The loss is the mean of term_i over those
/// anchors. Anchors with empty P(i) are skipped; if all are empty a
/// ConfigError is thrown. Terms may be negative because the denominator is
/// a mean rather than a sum.
Var l_con(Tape& tape, Var reps, std::span<const int> labels, std::span<const int> twins, bool label_guidance = true);
double l_con_value(const Matrix& reps, std::span<const int> labels, std::span<const int> twins,
                   bool label_guidance = true);

/// Representation-level distillation: sum_i |g_i - g'_i|^2 where g = r/|r|
/// and g' comes from the frozen previous encoder (no gradient into it).
Var l_rld(Tape& tape, Var current_reps, const Matrix& previous_reps);

/// Classification-level distillation: sum_i MSE(softmax(z_i), p'_i) where z
/// are the current model's logits on the old heads and p' the frozen
/// model's probabilities on the same heads.
Var l_kd(Tape& tape, Var current_old_logits, const Matrix& previous_old_probs);

/// Classification loss: sum_i CE(softmax(z_i), column_i) over all seen classes.
Var l_ce(Tape& tape, Var logits, std::span<const int> target_columns);

}  // namespace c4il
