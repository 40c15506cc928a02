#include "c4il/data/batch.hpp"

#include <algorithm>
#include <numeric>

namespace c4il {

AuditedPool::AuditedPool(std::span<const Sample> phase_data, std::span<const Sample> memory)
    : memory_size_(memory.size()) {
  items_.reserve(phase_data.size() + memory.size());
  for (const Sample& s : phase_data) items_.push_back(&s);
  for (const Sample& s : memory) items_.push_back(&s);
}

const Sample& AuditedPool::read(std::size_t index) {
  const Sample& s = *items_.at(index);
  touched_.insert(s.id);
  ++reads_;
  return s;
}

std::vector<int> AuditedPool::labels() const {
  std::vector<int> out;
  out.reserve(items_.size());
  for (const Sample* s : items_) out.push_back(s->label);
  return out;
}

std::size_t AuditedPool::touched_in(const std::set<std::int64_t>& forbidden) const {
  std::size_t n = 0;
  for (std::int64_t id : touched_) n += forbidden.count(id);
  return n;
}

TrainingBatch build_training_batch(AuditedPool& pool, std::size_t batch_size, const AugmentationPolicy& policy,
                                   Rng& rng) {
  if (pool.size() == 0) throw DataError("build_training_batch: empty pool");
  if (batch_size < 2) throw DataError("build_training_batch: batch size must be at least 2");
  const std::size_t n = std::min(batch_size, pool.size());

  // Partial Fisher-Yates: the first n slots become a uniform draw without replacement.
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + uniform_index(rng, pool.size() - i)]);

  TrainingBatch batch;
  const Sample& first = pool.read(order[0]);
  const Eigen::Index d = first.features.size();
  batch.original.resize(static_cast<Eigen::Index>(n), d);
  batch.augmented.resize(static_cast<Eigen::Index>(n), d);
  for (std::size_t i = 0; i < n; ++i) {
    const Sample& s = i == 0 ? first : pool.read(order[i]);
    if (s.features.size() != d) throw ShapeError("build_training_batch: ragged feature widths");
    const Sample twin = augment(s, policy, rng);
    batch.original.row(static_cast<Eigen::Index>(i)) = s.features.transpose();
    batch.augmented.row(static_cast<Eigen::Index>(i)) = twin.features.transpose();
    batch.labels.push_back(s.label);
    batch.ids.push_back(s.id);
  }
  return batch;
}

}  // namespace c4il
