#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "c4il/data/sample.hpp"

namespace c4il {

/// Fixed-capacity, class-balanced exemplar store with uniform random retention.
class MemoryBank {
 public:
  explicit MemoryBank(std::size_t capacity);

  /// Per-class quotas for `classes` sorted class ids: floor(capacity / n) each,
  /// with the remainder handed one apiece to the lowest ids.
  static std::map<int, std::size_t> quotas(std::size_t capacity, std::span<const int> classes);

  /// Folds in a finished phase: recomputes quotas over every class seen so
  /// far, randomly down-samples stored classes, and randomly samples the new
  /// ones. A class with fewer samples than its quota keeps all of them.
  void update(std::span<const Sample> phase_data, std::uint64_t seed);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const;
  bool empty() const { return size() == 0; }
  /// Stored count per seen class, including classes whose quota fell to zero.
  std::map<int, std::size_t> counts() const;
  const std::set<int>& seen_classes() const { return seen_; }
  const std::map<int, std::vector<Sample>>& store() const { return store_; }
  /// All exemplars, class by class in ascending id order.
  Dataset samples() const;
  std::set<std::int64_t> ids() const;

 private:
  std::size_t capacity_;
  std::set<int> seen_;
  std::map<int, std::vector<Sample>> store_;  // classes with a zero quota are dropped
};

}  // namespace c4il
