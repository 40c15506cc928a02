#include "c4il/data/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "c4il/numerics/rng.hpp"

namespace c4il {

namespace {

void check(const GaussianMixtureSpec& spec) {
  if (spec.classes < 2) throw DataError("gen_gaussian_mixture: need at least 2 classes");
  if (spec.dim < 1) throw DataError("gen_gaussian_mixture: dim must be positive");
  if (spec.per_class < 1) throw DataError("gen_gaussian_mixture: per_class must be positive");
  if (!(spec.separation > 0.0)) throw DataError("gen_gaussian_mixture: separation must be > 0");
  if (!(spec.sigma_within > 0.0)) throw DataError("gen_gaussian_mixture: sigma_within must be > 0");
}

}  // namespace

Matrix gaussian_mixture_means(const GaussianMixtureSpec& spec) {
  check(spec);
  const double d = spec.dim;
  const double min_dist = spec.separation * spec.sigma_within;
  // RMS distance between uniform points in [-L, L]^d is L * sqrt(2d/3); start
  // just above the minimum and widen the cube while placements keep failing.
  const double start_width = 1.1 * min_dist * std::sqrt(3.0 / (2.0 * d));
  double half_width = start_width;
  Rng rng = make_rng(spec.seed, {0x4d45414e53ULL});
  Matrix means(spec.classes, spec.dim);
  for (int c = 0; c < spec.classes; ++c) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      if (attempt > 0 && attempt % 20 == 0) half_width = std::min(1.1 * half_width, 4.0 * start_width);
      for (int k = 0; k < spec.dim; ++k) means(c, k) = half_width * (2.0 * uniform01(rng) - 1.0);
      placed = true;
      for (int o = 0; o < c && placed; ++o) placed = (means.row(c) - means.row(o)).norm() >= min_dist;
    }
    if (!placed) {
      throw DataError("gen_gaussian_mixture: could not place class " + std::to_string(c) + " at separation " +
                      std::to_string(spec.separation) + " in " + std::to_string(spec.dim) + " dims");
    }
  }
  return means;
}

Dataset gen_gaussian_mixture(const GaussianMixtureSpec& spec) {
  const Matrix means = gaussian_mixture_means(spec);
  Rng rng = make_rng(spec.seed, {0x53414d504cULL});
  std::normal_distribution<double> noise(0.0, spec.sigma_within);
  Dataset out;
  out.reserve(static_cast<std::size_t>(spec.classes) * static_cast<std::size_t>(spec.per_class));
  std::int64_t id = 0;
  for (int c = 0; c < spec.classes; ++c) {
    for (int i = 0; i < spec.per_class; ++i) {
      Sample s;
      s.id = id++;
      s.label = c;
      s.features = means.row(c).transpose();
      for (int k = 0; k < spec.dim; ++k) s.features(k) += noise(rng);
      out.push_back(std::move(s));
    }
  }
  return out;
}

}  // namespace c4il
