#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "c4il/data/augment.hpp"

namespace c4il {

/// Read-only view of D(t*) = D(t) U D(mem) that logs every sample id it hands out.
/// Training reaches samples only through read(), so the log is a complete
/// record of what one phase touched.
class AuditedPool {
 public:
  AuditedPool(std::span<const Sample> phase_data, std::span<const Sample> memory);

  std::size_t size() const { return items_.size(); }
  std::size_t memory_size() const { return memory_size_; }
  const Sample& read(std::size_t index);
  /// Labels of the pool without touching sample contents (no audit entry).
  std::vector<int> labels() const;

  const std::set<std::int64_t>& touched() const { return touched_; }
  std::size_t read_count() const { return reads_; }
  /// Number of distinct touched ids that appear in `forbidden`.
  std::size_t touched_in(const std::set<std::int64_t>& forbidden) const;

 private:
  std::vector<const Sample*> items_;
  std::size_t memory_size_ = 0;
  std::set<std::int64_t> touched_;
  std::size_t reads_ = 0;
};

/// A batch drawn from D(t*) plus one augmented view per sample. Row i of
/// `augmented` is the twin of row i of `original`.
struct TrainingBatch {
  Matrix original;
  Matrix augmented;
  std::vector<int> labels;
  std::vector<std::int64_t> ids;

  std::size_t size() const { return labels.size(); }
};

/// Draws min(batch_size, |pool|) distinct samples uniformly and augments each once.
/// Throws DataError for an empty pool or batch_size < 2.
TrainingBatch build_training_batch(AuditedPool& pool, std::size_t batch_size, const AugmentationPolicy& policy,
                                   Rng& rng);

}  // namespace c4il
