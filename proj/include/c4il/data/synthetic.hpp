#pragma once

#include <cstdint>

#include "c4il/data/sample.hpp"

namespace c4il {

struct GaussianMixtureSpec {
  int classes = 10;
  int dim = 16;
  int per_class = 100;
  double separation = 4.0;    // minimum pairwise mean distance, in units of sigma_within
  double sigma_within = 1.0;
  std::uint64_t seed = 0;
};

/// Isotropic Gaussian classes N(mean_c, sigma^2 I). Means are drawn uniformly
/// from a cube sized so random pairs start about 1.1x the separation apart;
/// each draw is rejected until it clears the minimum distance to all earlier
/// means, and the cube widens by 10% after every 20 rejections, up to 4x its
/// starting size. Throws DataError after 1000 rejected draws for one mean.
/// Samples are class-major with ids 0..classes*per_class-1.
Dataset gen_gaussian_mixture(const GaussianMixtureSpec& spec);

/// The class means gen_gaussian_mixture would use for `spec` (rows).
Matrix gaussian_mixture_means(const GaussianMixtureSpec& spec);

}  // namespace c4il
