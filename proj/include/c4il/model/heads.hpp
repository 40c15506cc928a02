#pragma once

#include <map>
#include <span>
#include <vector>

#include "c4il/numerics/rng.hpp"
#include "c4il/numerics/tape.hpp"

namespace c4il {

/// Contiguous run of heads [first, first + count).
struct HeadRange {
  std::size_t first = 0;
  std::size_t count = 0;
};

enum class HeadScope { current_phase, all_seen };

/// Phase-wise linear classifier W = [W1, ..., Wt] with no bias, applied as
/// softmax(W^T r). Head t is an m x |C_t| matrix whose columns map to the
/// global class ids given when the head was created.
class ClassifierHeads {
 public:
  explicit ClassifierHeads(int representation_dim);

  /// Appends one head for `class_ids`, initialized uniformly in
  /// [-1/sqrt(m), 1/sqrt(m)]. Existing heads are left untouched.
  void extend(std::span<const int> class_ids, Rng& rng);
  /// Appends a head with explicit weights (m x class_ids.size()).
  void extend(std::span<const int> class_ids, Matrix weights);

  int representation_dim() const { return dim_; }
  std::size_t head_count() const { return heads_.size(); }
  int class_count() const { return static_cast<int>(column_class_.size()); }
  int class_count(HeadRange range) const;
  HeadRange scope(HeadScope s) const;
  /// The heads of every phase before the current one.
  HeadRange old_heads() const;

  const Matrix& head(std::size_t t) const { return heads_.at(t); }
  std::span<const int> head_classes(std::size_t t) const { return head_classes_.at(t); }

  bool knows(int class_id) const { return column_of_.contains(class_id); }
  /// Column of `class_id` in the concatenation of all heads; throws LabelError when unseen.
  int column_of(int class_id) const;
  /// Column of `class_id` counted from the first column of `range`.
  int column_in(HeadRange range, int class_id) const;
  int class_at(int column) const { return column_class_.at(static_cast<std::size_t>(column)); }
  std::span<const int> column_classes() const { return column_class_; }

  Matrix logits(const Matrix& reps, HeadRange range) const;
  /// Row-stochastic class probabilities over the scoped heads.
  Matrix classify(const Matrix& reps, HeadScope scope) const;
  Matrix classify(const Matrix& reps, HeadRange range) const;
  /// Global class id of the arg-max over all seen classes, per row.
  std::vector<int> predict(const Matrix& reps) const;

  struct Taped {
    Var logits;
    std::vector<Var> params;  // one per head in range when trainable
  };
  Taped logits(Tape& tape, Var reps, HeadRange range, bool trainable = true) const;

  std::span<Matrix> parameters() { return heads_; }
  std::span<const Matrix> parameters() const { return heads_; }

  friend bool operator==(const ClassifierHeads&, const ClassifierHeads&);

 private:
  void check_range(HeadRange range) const;
  Eigen::Index first_column(HeadRange range) const;

  int dim_;
  std::vector<Matrix> heads_;
  std::vector<std::vector<int>> head_classes_;
  std::vector<int> column_class_;
  std::map<int, int> column_of_;
};

}  // namespace c4il
