#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "c4il/numerics/matrix.hpp"

namespace c4il {

/// Height x width x channels layout of a raster sample; all zero for plain vectors.
struct RasterShape {
  int height = 0;
  int width = 0;
  int channels = 0;

  bool is_raster() const { return channels > 0; }
  int size() const { return height * width * channels; }
  friend bool operator==(const RasterShape&, const RasterShape&) = default;
};

/// One labeled example. Raster features are stored flattened in HWC order
/// with values in [0, 1].
struct Sample {
  std::int64_t id = 0;
  int label = 0;
  Vector features;
  RasterShape raster;

  bool is_raster() const { return raster.is_raster(); }
};

using Dataset = std::vector<Sample>;

/// Stacks sample features as rows.
Matrix stack_features(std::span<const Sample> samples);
template <typename Ptrs>
Matrix stack_feature_ptrs(const Ptrs& samples) {
  if (samples.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Eigen::Index>(samples.size()), samples.front()->features.size());
  Eigen::Index i = 0;
  for (const Sample* s : samples) out.row(i++) = s->features.transpose();
  return out;
}
std::vector<int> labels_of(std::span<const Sample> samples);

/// Sorted distinct labels.
std::vector<int> distinct_labels(std::span<const Sample> samples);

/// Throws DataError on non-finite features, inconsistent dimensionality, or
/// raster values outside [0, 1].
void validate_dataset(std::span<const Sample> samples);

}  // namespace c4il
