#include "c4il/data/sample.hpp"

#include <algorithm>
#include <set>
#include <string>

namespace c4il {

Matrix stack_features(std::span<const Sample> samples) {
  if (samples.empty()) return Matrix(0, 0);
  Matrix out(static_cast<Eigen::Index>(samples.size()), samples.front().features.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].features.size() != out.cols()) throw ShapeError("stack_features: ragged feature widths");
    out.row(static_cast<Eigen::Index>(i)) = samples[i].features.transpose();
  }
  return out;
}

std::vector<int> labels_of(std::span<const Sample> samples) {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const Sample& s : samples) out.push_back(s.label);
  return out;
}

std::vector<int> distinct_labels(std::span<const Sample> samples) {
  std::set<int> seen;
  for (const Sample& s : samples) seen.insert(s.label);
  return {seen.begin(), seen.end()};
}

void validate_dataset(std::span<const Sample> samples) {
  if (samples.empty()) return;
  const Eigen::Index d = samples.front().features.size();
  for (const Sample& s : samples) {
    if (s.features.size() != d) throw DataError("dataset: sample " + std::to_string(s.id) + " has a different width");
    if (!s.features.allFinite()) throw DataError("dataset: sample " + std::to_string(s.id) + " is not finite");
    if (s.is_raster()) {
      if (s.raster.size() != d) throw DataError("dataset: raster shape does not match feature count");
      if (s.features.minCoeff() < 0.0 || s.features.maxCoeff() > 1.0) {
        throw DataError("dataset: raster sample " + std::to_string(s.id) + " outside [0, 1]");
      }
    }
  }
}

}  // namespace c4il
