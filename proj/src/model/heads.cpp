#include "c4il/model/heads.hpp"

#include <cmath>
#include <string>

#include "c4il/numerics/ops.hpp"

namespace c4il {

ClassifierHeads::ClassifierHeads(int representation_dim) : dim_(representation_dim) {
  if (dim_ <= 0) throw ShapeError("heads: representation dim must be positive");
}

void ClassifierHeads::extend(std::span<const int> class_ids, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(dim_));
  std::uniform_real_distribution<double> u(-bound, bound);
  Matrix w(dim_, static_cast<Eigen::Index>(class_ids.size()));
  for (Eigen::Index i = 0; i < w.size(); ++i) w.data()[i] = u(rng);
  extend(class_ids, std::move(w));
}

void ClassifierHeads::extend(std::span<const int> class_ids, Matrix weights) {
  if (class_ids.empty()) throw ShapeError("extend_heads: a head needs at least one class");
  if (weights.rows() != dim_ || weights.cols() != static_cast<Eigen::Index>(class_ids.size())) {
    throw ShapeError("extend_heads: weights " + shape_of(weights) + " for " + std::to_string(class_ids.size()) +
                     " classes at dim " + std::to_string(dim_));
  }
  for (int c : class_ids) {
    if (column_of_.contains(c)) throw LabelError("extend_heads: class " + std::to_string(c) + " already has a head");
  }
  for (int c : class_ids) {
    column_of_.emplace(c, static_cast<int>(column_class_.size()));
    column_class_.push_back(c);
  }
  heads_.push_back(std::move(weights));
  head_classes_.emplace_back(class_ids.begin(), class_ids.end());
}

int ClassifierHeads::class_count(HeadRange range) const {
  check_range(range);
  int n = 0;
  for (std::size_t t = range.first; t < range.first + range.count; ++t) n += static_cast<int>(heads_[t].cols());
  return n;
}

HeadRange ClassifierHeads::scope(HeadScope s) const {
  if (heads_.empty()) throw ProtocolError("classify: no heads have been created yet");
  if (s == HeadScope::current_phase) return {heads_.size() - 1, 1};
  return {0, heads_.size()};
}

HeadRange ClassifierHeads::old_heads() const {
  if (heads_.size() < 2) throw ProtocolError("heads: no previous-phase heads exist");
  return {0, heads_.size() - 1};
}

int ClassifierHeads::column_of(int class_id) const {
  const auto it = column_of_.find(class_id);
  if (it == column_of_.end()) throw LabelError("heads: class " + std::to_string(class_id) + " has not been seen");
  return it->second;
}

int ClassifierHeads::column_in(HeadRange range, int class_id) const {
  const int col = column_of(class_id) - static_cast<int>(first_column(range));
  if (col < 0 || col >= class_count(range)) {
    throw LabelError("heads: class " + std::to_string(class_id) + " is outside the requested heads");
  }
  return col;
}

void ClassifierHeads::check_range(HeadRange range) const {
  if (range.count == 0 || range.first + range.count > heads_.size()) {
    throw ProtocolError("heads: range [" + std::to_string(range.first) + ", " +
                        std::to_string(range.first + range.count) + ") outside " + std::to_string(heads_.size()) +
                        " heads");
  }
}

Eigen::Index ClassifierHeads::first_column(HeadRange range) const {
  Eigen::Index c = 0;
  for (std::size_t t = 0; t < range.first; ++t) c += heads_[t].cols();
  return c;
}

Matrix ClassifierHeads::logits(const Matrix& reps, HeadRange range) const {
  check_range(range);
  if (reps.cols() != dim_) {
    throw ShapeError("classify: representations " + shape_of(reps) + " at head dim " + std::to_string(dim_));
  }
  Matrix out(reps.rows(), class_count(range));
  Eigen::Index at = 0;
  for (std::size_t t = range.first; t < range.first + range.count; ++t) {
    out.middleCols(at, heads_[t].cols()) = reps * heads_[t];
    at += heads_[t].cols();
  }
  return out;
}

Matrix ClassifierHeads::classify(const Matrix& reps, HeadScope s) const { return classify(reps, scope(s)); }

Matrix ClassifierHeads::classify(const Matrix& reps, HeadRange range) const {
  return softmax_rows(logits(reps, range));
}

std::vector<int> ClassifierHeads::predict(const Matrix& reps) const {
  const Eigen::VectorXi cols = argmax_rows(logits(reps, scope(HeadScope::all_seen)));
  std::vector<int> out(static_cast<std::size_t>(cols.size()));
  for (Eigen::Index i = 0; i < cols.size(); ++i) out[static_cast<std::size_t>(i)] = class_at(cols(i));
  return out;
}

ClassifierHeads::Taped ClassifierHeads::logits(Tape& tape, Var reps, HeadRange range, bool trainable) const {
  check_range(range);
  if (tape.value(reps).cols() != dim_) {
    throw ShapeError("classify: representations " + shape_of(tape.value(reps)) + " at head dim " +
                     std::to_string(dim_));
  }
  Taped out;
  std::vector<Var> parts;
  for (std::size_t t = range.first; t < range.first + range.count; ++t) {
    const Var w = tape.leaf(heads_[t], trainable);
    if (trainable) out.params.push_back(w);
    parts.push_back(matmul(tape, reps, w));
  }
  out.logits = parts.size() == 1 ? parts.front() : concat_cols(tape, parts);
  return out;
}

bool operator==(const ClassifierHeads& a, const ClassifierHeads& b) {
  if (a.dim_ != b.dim_ || a.head_classes_ != b.head_classes_) return false;
  for (std::size_t t = 0; t < a.heads_.size(); ++t) {
    if (a.heads_[t] != b.heads_[t]) return false;
  }
  return true;
}

}  // namespace c4il
