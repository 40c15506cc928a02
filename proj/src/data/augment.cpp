#include "c4il/data/augment.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace c4il {

namespace {

double uniform(Rng& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

bool bernoulli(Rng& rng, double p) { return p > 0.0 && uniform01(rng) < p; }

void check_prob(double p, const char* name) {
  if (!(p >= 0.0 && p <= 1.0)) throw DataError(std::string("augmentation: ") + name + " must lie in [0, 1]");
}

struct Image {
  int h, w, c;
  Vector& px;
  double& at(int y, int x, int ch) { return px(static_cast<Eigen::Index>((y * w + x) * c + ch)); }
};

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

Vector bilinear_crop_resize(const Vector& src, const RasterShape& shape, int top, int left, int ch, int cw) {
  const int H = shape.height, W = shape.width, C = shape.channels;
  Vector out(src.size());
  const double sy = static_cast<double>(ch) / H;
  const double sx = static_cast<double>(cw) / W;
  for (int y = 0; y < H; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(ch - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, ch - 1);
    const double wy = fy - y0;
    for (int x = 0; x < W; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(cw - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, cw - 1);
      const double wx = fx - x0;
      for (int k = 0; k < C; ++k) {
        auto s = [&](int yy, int xx) { return src(((top + yy) * W + (left + xx)) * C + k); };
        const double v = (1 - wy) * ((1 - wx) * s(y0, x0) + wx * s(y0, x1)) + wy * ((1 - wx) * s(y1, x0) + wx * s(y1, x1));
        out((y * W + x) * C + k) = v;
      }
    }
  }
  return out;
}

void random_resized_crop(Sample& s, const RasterAugment& p, Rng& rng) {
  if (p.crop_scale_min >= 1.0) return;
  const int H = s.raster.height, W = s.raster.width;
  const double area = static_cast<double>(H) * W;
  const double log_lo = std::log(3.0 / 4.0), log_hi = std::log(4.0 / 3.0);
  for (int attempt = 0; attempt < 10; ++attempt) {
    const double target = area * uniform(rng, p.crop_scale_min, p.crop_scale_max);
    const double ratio = std::exp(uniform(rng, log_lo, log_hi));
    const int cw = static_cast<int>(std::lround(std::sqrt(target * ratio)));
    const int ch = static_cast<int>(std::lround(std::sqrt(target / ratio)));
    if (cw > 0 && ch > 0 && cw <= W && ch <= H) {
      const int top = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(H - ch + 1)));
      const int left = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(W - cw + 1)));
      if (ch == H && cw == W) return;
      s.features = bilinear_crop_resize(s.features, s.raster, top, left, ch, cw);
      return;
    }
  }
  // Every attempt fell outside the image: keep the whole frame.
}

void horizontal_flip(Sample& s) {
  Image img{s.raster.height, s.raster.width, s.raster.channels, s.features};
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w / 2; ++x) {
      for (int k = 0; k < img.c; ++k) std::swap(img.at(y, x, k), img.at(y, img.w - 1 - x, k));
    }
  }
}

void clamp01(Vector& v) { v = v.cwiseMax(0.0).cwiseMin(1.0); }

std::array<double, 3> rgb_to_hsv(double r, double g, double b) {
  const double mx = std::max({r, g, b});
  const double mn = std::min({r, g, b});
  const double d = mx - mn;
  double h = 0.0;
  if (d > 0.0) {
    if (mx == r) {
      h = std::fmod((g - b) / d, 6.0);
    } else if (mx == g) {
      h = (b - r) / d + 2.0;
    } else {
      h = (r - g) / d + 4.0;
    }
    h /= 6.0;
    if (h < 0.0) h += 1.0;
  }
  const double sat = mx > 0.0 ? d / mx : 0.0;
  return {h, sat, mx};
}

std::array<double, 3> hsv_to_rgb(double h, double s, double v) {
  const double hh = h * 6.0;
  const int i = static_cast<int>(std::floor(hh)) % 6;
  const double f = hh - std::floor(hh);
  const double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
  switch (i) {
    case 0: return {v, t, p};
    case 1: return {q, v, p};
    case 2: return {p, v, t};
    case 3: return {p, q, v};
    case 4: return {t, p, v};
    default: return {v, p, q};
  }
}

void color_jitter(Sample& s, const RasterAugment& p, Rng& rng) {
  Image img{s.raster.height, s.raster.width, s.raster.channels, s.features};
  const bool rgb = img.c >= 3;
  const int pixels = img.h * img.w;

  if (p.brightness > 0.0) {
    s.features *= uniform(rng, 1.0 - p.brightness, 1.0 + p.brightness);
    clamp01(s.features);
  }
  if (p.contrast > 0.0) {
    const double factor = uniform(rng, 1.0 - p.contrast, 1.0 + p.contrast);
    double mean = 0.0;
    if (rgb) {
      for (int y = 0; y < img.h; ++y)
        for (int x = 0; x < img.w; ++x) mean += luminance(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
      mean /= pixels;
    } else {
      mean = s.features.mean();
    }
    s.features = ((s.features.array() - mean) * factor + mean).matrix();
    clamp01(s.features);
  }
  if (!rgb) return;  // saturation and hue need color channels
  if (p.saturation > 0.0) {
    const double factor = uniform(rng, 1.0 - p.saturation, 1.0 + p.saturation);
    for (int y = 0; y < img.h; ++y) {
      for (int x = 0; x < img.w; ++x) {
        const double g = luminance(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
        for (int k = 0; k < 3; ++k) img.at(y, x, k) = std::clamp((img.at(y, x, k) - g) * factor + g, 0.0, 1.0);
      }
    }
  }
  if (p.hue > 0.0) {
    const double shift = uniform(rng, -p.hue, p.hue);
    for (int y = 0; y < img.h; ++y) {
      for (int x = 0; x < img.w; ++x) {
        auto [h, sat, v] = rgb_to_hsv(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
        h = std::fmod(h + shift + 1.0, 1.0);
        const auto out = hsv_to_rgb(h, sat, v);
        for (int k = 0; k < 3; ++k) img.at(y, x, k) = std::clamp(out[static_cast<std::size_t>(k)], 0.0, 1.0);
      }
    }
  }
}

void random_grayscale(Sample& s) {
  Image img{s.raster.height, s.raster.width, s.raster.channels, s.features};
  if (img.c < 3) return;
  for (int y = 0; y < img.h; ++y) {
    for (int x = 0; x < img.w; ++x) {
      const double g = luminance(img.at(y, x, 0), img.at(y, x, 1), img.at(y, x, 2));
      for (int k = 0; k < 3; ++k) img.at(y, x, k) = g;
    }
  }
}

}  // namespace

AugmentationPolicy AugmentationPolicy::identity(AugmentMode mode) {
  AugmentationPolicy p;
  p.mode = mode;
  p.raster = RasterAugment{1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
  p.vector = VectorAugment{0.0, 0.0};
  return p;
}

AugmentationPolicy AugmentationPolicy::for_vectors(const Dataset& data, double relative_sigma, double mask_prob) {
  AugmentationPolicy p;
  p.mode = AugmentMode::vector;
  double mean_std = 0.0;
  if (data.size() > 1) {
    const Matrix x = stack_features(data);
    const RowVector mu = x.colwise().mean();
    const RowVector var = (x.rowwise() - mu).array().square().colwise().sum() / static_cast<double>(x.rows() - 1);
    mean_std = var.array().sqrt().mean();
  }
  p.vector = VectorAugment{relative_sigma * mean_std, mask_prob};
  return p;
}

void AugmentationPolicy::validate() const {
  check_prob(raster.flip_prob, "flip probability");
  check_prob(raster.grayscale_prob, "grayscale probability");
  check_prob(vector.mask_prob, "mask probability");
  if (!(raster.crop_scale_min > 0.0 && raster.crop_scale_min <= raster.crop_scale_max && raster.crop_scale_max <= 1.0)) {
    throw DataError("augmentation: crop scale range must satisfy 0 < min <= max <= 1");
  }
  for (double s : {raster.brightness, raster.contrast, raster.saturation}) {
    if (!(s >= 0.0 && s <= 1.0)) throw DataError("augmentation: jitter strengths must lie in [0, 1]");
  }
  if (!(raster.hue >= 0.0 && raster.hue <= 0.5)) throw DataError("augmentation: hue strength must lie in [0, 0.5]");
  if (!(vector.noise_sigma >= 0.0)) throw DataError("augmentation: noise sigma must be >= 0");
}

Sample augment(const Sample& sample, const AugmentationPolicy& policy, Rng& rng) {
  const bool raster_mode = policy.mode == AugmentMode::raster;
  if (raster_mode != sample.is_raster()) {
    throw DataError(std::string("augment: ") + (raster_mode ? "raster" : "vector") + " policy applied to a " +
                    (sample.is_raster() ? "raster" : "vector") + " sample");
  }
  Sample out = sample;
  if (raster_mode) {
    const RasterAugment& p = policy.raster;
    random_resized_crop(out, p, rng);
    if (bernoulli(rng, p.flip_prob)) horizontal_flip(out);
    color_jitter(out, p, rng);
    if (bernoulli(rng, p.grayscale_prob)) random_grayscale(out);
    clamp01(out.features);
  } else {
    const VectorAugment& p = policy.vector;
    if (p.noise_sigma > 0.0) {
      std::normal_distribution<double> noise(0.0, p.noise_sigma);
      for (Eigen::Index i = 0; i < out.features.size(); ++i) out.features(i) += noise(rng);
    }
    if (p.mask_prob > 0.0) {
      for (Eigen::Index i = 0; i < out.features.size(); ++i) {
        if (uniform01(rng) < p.mask_prob) out.features(i) = 0.0;
      }
    }
  }
  return out;
}

}  // namespace c4il
