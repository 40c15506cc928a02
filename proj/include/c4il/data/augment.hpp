#pragma once

#include "c4il/data/sample.hpp"
#include "c4il/numerics/rng.hpp"

namespace c4il {

enum class AugmentMode { vector, raster };

/// Image recipe: random resized crop, horizontal flip, color jitter,
/// random grayscale, applied in that order.
struct RasterAugment {
  double crop_scale_min = 0.2;
  double crop_scale_max = 1.0;
  double flip_prob = 0.5;
  double brightness = 0.4;
  double contrast = 0.4;
  double saturation = 0.4;
  double hue = 0.1;
  double grayscale_prob = 0.2;
};

/// Vector analogue: additive N(0, sigma^2) noise, then each coordinate
/// zeroed with probability mask_prob.
struct VectorAugment {
  double noise_sigma = 0.1;
  double mask_prob = 0.1;
};

struct AugmentationPolicy {
  AugmentMode mode = AugmentMode::vector;
  RasterAugment raster;
  VectorAugment vector;

  /// Policy whose every draw returns the input unchanged.
  static AugmentationPolicy identity(AugmentMode mode);
  /// Vector policy with sigma = relative_sigma * mean per-feature std of `data`.
  static AugmentationPolicy for_vectors(const Dataset& data, double relative_sigma = 0.1, double mask_prob = 0.1);

  /// Throws DataError when a probability leaves [0, 1] or the crop range leaves (0, 1].
  void validate() const;
};

/// Draws one augmentation alpha ~ A and applies it. Labels, ids, and
/// dimensionality are preserved; raster outputs stay in [0, 1].
Sample augment(const Sample& sample, const AugmentationPolicy& policy, Rng& rng);

}  // namespace c4il
