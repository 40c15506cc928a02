#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "c4il/numerics/matrix.hpp"

namespace c4il {

struct ProbeOptions {
  double weight_decay = 1e-4;
  double grad_tolerance = 1e-5;
  int max_iterations = 2000;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
};

/// Linear-evaluation outcome. `weights` act on standardized features
/// (train-split mean and std), one column per entry of `classes`.
struct ProbeResult {
  double accuracy = 0.0;  // in [0, 1], on the held-out rows
  Matrix weights;
  RowVector bias;
  std::vector<int> classes;
  double final_loss = 0.0;
  double grad_norm = 0.0;
  int iterations = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> test;
};

/// Seeded stratified split: within each label, round(fraction * n) rows
/// (at least one, and at least one left over when n >= 2) go to train.
SplitIndices stratified_split(std::span<const int> labels, double train_fraction, std::uint64_t seed);

/// Multinomial logistic regression with bias, fit by full-batch gradient
/// descent (step 1/L from a power-iteration curvature bound) on mean
/// cross-entropy plus weight decay, until the gradient norm drops below the
/// tolerance or the iteration cap. Throws DataError with fewer than two
/// training classes.
ProbeResult linear_probe(const Matrix& train_reps, std::span<const int> train_labels, const Matrix& test_reps,
                         std::span<const int> test_labels, const ProbeOptions& options = {});

/// Splits (reps, labels) with stratified_split and probes.
ProbeResult linear_probe(const Matrix& reps, std::span<const int> labels, const ProbeOptions& options = {});

}  // namespace c4il
