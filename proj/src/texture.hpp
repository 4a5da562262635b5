// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Procedural 2-D colour patterns shared by the scene renderer and the
// shoe image sampler.

#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "footcontact/common.hpp"

namespace footcontact {

enum class Pattern : int { kStripes = 0, kChecker, kNoise, kGradient };

struct TextureParams {
  Pattern pattern = Pattern::kStripes;
  Eigen::Vector3d color_a = Eigen::Vector3d::Zero();
  Eigen::Vector3d color_b = Eigen::Vector3d::Ones();
  double frequency = 4.0;
  double angle = 0.0;
  std::uint64_t noise_seed = 0;
};

// Colours drawn per channel from [lo, hi].
TextureParams random_texture(Rng& rng, double lo, double hi);
Eigen::Vector3d texture_color(const TextureParams& tex, double u, double v);

}  // namespace footcontact
