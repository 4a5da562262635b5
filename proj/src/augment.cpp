// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <numbers>

#include "footcontact/synth_dataset.hpp"

namespace footcontact {

namespace {

constexpr int kMaxAttempts = 10;
constexpr float kFill = 0.5f;

float sample_bilinear(const Image& img, int c, double x, double y) {
  const double fx = x - 0.5;
  const double fy = y - 0.5;
  const int x0 = static_cast<int>(std::floor(fx));
  const int y0 = static_cast<int>(std::floor(fy));
  const double wx = fx - x0;
  const double wy = fy - y0;
  double acc = 0;
  for (int dy = 0; dy < 2; ++dy) {
    for (int dx = 0; dx < 2; ++dx) {
      const int xx = x0 + dx;
      const int yy = y0 + dy;
      const double w = (dx ? wx : 1 - wx) * (dy ? wy : 1 - wy);
      const bool inside = xx >= 0 && yy >= 0 && xx < img.width && yy < img.height;
      acc += w * (inside ? img.at(c, yy, xx) : kFill);
    }
  }
  return static_cast<float>(acc);
}

Image gaussian_blur(const Image& img, double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& v : k) v /= sum;
  Image tmp(img.channels, img.height, img.width);
  Image out(img.channels, img.height, img.width);
  for (int c = 0; c < img.channels; ++c) {
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * img.at(c, y, std::clamp(x + i, 0, img.width - 1));
        tmp.at(c, y, x) = static_cast<float>(acc);
      }
    for (int y = 0; y < img.height; ++y)
      for (int x = 0; x < img.width; ++x) {
        double acc = 0;
        for (int i = -radius; i <= radius; ++i)
          acc += k[i + radius] * tmp.at(c, std::clamp(y + i, 0, img.height - 1), x);
        out.at(c, y, x) = static_cast<float>(acc);
      }
  }
  return out;
}

bool has_foot(const SceneSample& s) {
  return std::any_of(s.foot_mask.begin(), s.foot_mask.end(), [](std::uint8_t m) { return m; });
}

}  // namespace

void AugmentConfig::validate() const {
  if (!(scale_min > 0 && scale_max >= scale_min)) throw InvalidArgument("augment: bad scale range");
  if (!(max_rotation_deg >= 0 && max_rotation_deg <= 15)) {
    throw InvalidArgument("augment: max_rotation_deg must be in [0, 15]");
  }
  if (!(max_shift >= 0 && max_shift < 0.5)) throw InvalidArgument("augment: max_shift must be in [0, 0.5)");
  if (lowres_max_factor < 1) throw InvalidArgument("augment: lowres_max_factor must be >= 1");
  for (double p : {lowres_prob, noise_prob, blur_prob}) {
    if (!(p >= 0 && p <= 1)) throw InvalidArgument("augment: probabilities must be in [0, 1]");
  }
  if (noise_max_std < 0 || blur_max_sigma < 0) throw InvalidArgument("augment: negative magnitude");
}

AugmentParams sample_augment_params(std::uint64_t seed, const AugmentConfig& config, int width,
                                    int height) {
  config.validate();
  Rng rng(derive_seed(seed, 0xa06));
  AugmentParams p;
  p.scale = uniform(rng, config.scale_min, config.scale_max);
  p.rotation_deg = uniform(rng, -config.max_rotation_deg, config.max_rotation_deg);
  p.shift_x = uniform(rng, -config.max_shift, config.max_shift) * width;
  p.shift_y = uniform(rng, -config.max_shift, config.max_shift) * height;
  if (uniform(rng, 0, 1) < config.lowres_prob && config.lowres_max_factor >= 2) {
    p.lowres_factor = std::uniform_int_distribution<int>(2, config.lowres_max_factor)(rng);
  }
  if (uniform(rng, 0, 1) < config.noise_prob) p.noise_std = uniform(rng, 0, config.noise_max_std);
  if (uniform(rng, 0, 1) < config.blur_prob) p.blur_sigma = uniform(rng, 0.3, std::max(0.3, config.blur_max_sigma));
  p.noise_seed = rng();
  return p;
}

SceneSample apply_augment(const SceneSample& sample, const AugmentParams& params) {
  if (!(params.scale > 0) || params.lowres_factor < 1 || params.noise_std < 0 ||
      params.blur_sigma < 0) {
    throw InvalidArgument("augment: invalid parameters");
  }
  SceneSample out = sample;
  const int w = sample.width();
  const int h = sample.height();

  if (!params.geometric_identity()) {
    const double th = params.rotation_deg * std::numbers::pi / 180.0;
    const double ct = std::cos(th);
    const double st = std::sin(th);
    const double cx = 0.5 * w;
    const double cy = 0.5 * h;
    const std::size_t n = static_cast<std::size_t>(w) * h;
    out.image = Image(sample.image.channels, h, w);
    out.foot_mask.assign(n, 0);
    out.pixel_height.assign(n, 0.0f);
    out.height_valid.assign(n, 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        // Inverse of dst = c + s R (src - c) + t.
        const double dx = (x + 0.5 - cx - params.shift_x) / params.scale;
        const double dy = (y + 0.5 - cy - params.shift_y) / params.scale;
        const double sx = cx + ct * dx + st * dy;
        const double sy = cy - st * dx + ct * dy;
        for (int c = 0; c < sample.image.channels; ++c) {
          out.image.at(c, y, x) = sample_bilinear(sample.image, c, sx, sy);
        }
        const int ix = static_cast<int>(std::floor(sx));
        const int iy = static_cast<int>(std::floor(sy));
        if (ix < 0 || iy < 0 || ix >= w || iy >= h) continue;
        const std::size_t src = static_cast<std::size_t>(iy) * w + ix;
        const std::size_t dst = static_cast<std::size_t>(y) * w + x;
        out.foot_mask[dst] = sample.foot_mask[src];
        out.height_valid[dst] = sample.height_valid[src];
        out.pixel_height[dst] = static_cast<float>(sample.pixel_height[src] * params.scale);
      }
    }
    const double nx = sample.ground_normal.x();
    const double ny = sample.ground_normal.y();
    out.ground_normal.x() = ct * nx - st * ny;
    out.ground_normal.y() = st * nx + ct * ny;
  }

  if (params.lowres_factor > 1) {
    const int lh = std::max(1, h / params.lowres_factor);
    const int lw = std::max(1, w / params.lowres_factor);
    out.image = resize_bilinear(resize_bilinear(out.image, lh, lw), h, w);
  }
  if (params.blur_sigma > 0) out.image = gaussian_blur(out.image, params.blur_sigma);
  if (params.noise_std > 0) {
    Rng rng(params.noise_seed);
    std::normal_distribution<float> noise(0.0f, static_cast<float>(params.noise_std));
    for (float& v : out.image.data) v = std::clamp(v + noise(rng), 0.0f, 1.0f);
  }
  return out;
}

SceneSample augment(const SceneSample& sample, std::uint64_t seed, const AugmentConfig& config) {
  const bool foot_before = has_foot(sample);
  for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
    const AugmentParams p = sample_augment_params(derive_seed(seed, attempt), config,
                                                  sample.width(), sample.height());
    SceneSample out = apply_augment(sample, p);
    if (!foot_before || has_foot(out)) return out;
  }
  SceneSample out = sample;
  out.augment_warning = true;
  return out;
}

}  // namespace footcontact
