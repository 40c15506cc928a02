#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "c4il/data/sample.hpp"

namespace c4il {

struct PhaseData {
  std::vector<int> classes;  // sorted
  Dataset samples;
};

/// Ordered phases with pairwise-disjoint class sets and sample ids.
struct CILStream {
  std::vector<PhaseData> phases;

  std::size_t phase_count() const { return phases.size(); }
  /// Index of the phase that owns `class_id`; throws LabelError otherwise.
  std::size_t phase_of(int class_id) const;
  /// Classes of phases [0, upto), in phase order.
  std::vector<int> classes_before(std::size_t upto) const;
};

/// Evenly splits a labeled dataset into `phases` groups of whole classes.
/// The class-to-phase assignment is a seeded permutation of the sorted class
/// list; samples inside each phase are shuffled with the same seed.
/// Requires phases >= 2 and the class count divisible by `phases`.
CILStream split_stream(const Dataset& dataset, int phases, std::uint64_t seed);

/// One-phase stream over every class (the joint-training upper bound).
CILStream joint_stream(const Dataset& dataset, std::uint64_t seed);

/// Groups `samples` by the phase that owns each label in `stream`.
std::vector<Dataset> partition_like(const CILStream& stream, const Dataset& samples);

}  // namespace c4il
