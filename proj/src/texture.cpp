// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "texture.hpp"

#include <cmath>
#include <numbers>

namespace footcontact {

namespace {

double lattice(std::uint64_t seed, long ix, long iy) {
  const std::uint64_t h = mix_seed(seed ^ mix_seed(static_cast<std::uint64_t>(ix) * 0x9e3779b1ULL +
                                                    static_cast<std::uint64_t>(iy)));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

double value_noise(std::uint64_t seed, double u, double v) {
  const double fu = std::floor(u);
  const double fv = std::floor(v);
  const long ix = static_cast<long>(fu);
  const long iy = static_cast<long>(fv);
  const double tu = u - fu;
  const double tv = v - fv;
  const double su = tu * tu * (3 - 2 * tu);
  const double sv = tv * tv * (3 - 2 * tv);
  const double a = lattice(seed, ix, iy);
  const double b = lattice(seed, ix + 1, iy);
  const double c = lattice(seed, ix, iy + 1);
  const double d = lattice(seed, ix + 1, iy + 1);
  return (1 - sv) * ((1 - su) * a + su * b) + sv * ((1 - su) * c + su * d);
}

}  // namespace

TextureParams random_texture(Rng& rng, double lo, double hi) {
  TextureParams t;
  t.pattern = static_cast<Pattern>(std::uniform_int_distribution<int>(0, 3)(rng));
  for (int c = 0; c < 3; ++c) t.color_a(c) = uniform(rng, lo, hi);
  for (int c = 0; c < 3; ++c) t.color_b(c) = uniform(rng, lo, hi);
  t.frequency = uniform(rng, 2.0, 8.0);
  t.angle = uniform(rng, 0, std::numbers::pi);
  t.noise_seed = rng();
  return t;
}

Eigen::Vector3d texture_color(const TextureParams& tex, double u, double v) {
  const double ru = u * std::cos(tex.angle) + v * std::sin(tex.angle);
  const double rv = -u * std::sin(tex.angle) + v * std::cos(tex.angle);
  double w = 0;
  switch (tex.pattern) {
    case Pattern::kStripes:
      w = 0.5 + 0.5 * std::tanh(4.0 * std::sin(2 * std::numbers::pi * tex.frequency * ru));
      break;
    case Pattern::kChecker: {
      const long a = static_cast<long>(std::floor(ru * tex.frequency));
      const long b = static_cast<long>(std::floor(rv * tex.frequency));
      w = ((a + b) & 1) ? 1.0 : 0.0;
      break;
    }
    case Pattern::kNoise:
      w = 0.65 * value_noise(tex.noise_seed, ru * tex.frequency, rv * tex.frequency) +
          0.35 * value_noise(tex.noise_seed + 1, 3 * ru * tex.frequency, 3 * rv * tex.frequency);
      break;
    case Pattern::kGradient:
      w = 0.5 + 0.5 * std::sin(std::numbers::pi * 0.5 * tex.frequency * ru);
      break;
  }
  return (1 - w) * tex.color_a + w * tex.color_b;
}

}  // namespace footcontact
