// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "footcontact/synth_dataset.hpp"
#include "texture.hpp"

namespace footcontact {

namespace fs = std::filesystem;

namespace {

bool in_ellipse(double x, double y, double cx, double cy, double rx, double ry) {
  const double dx = (x - cx) / rx;
  const double dy = (y - cy) / ry;
  return dx * dx + dy * dy <= 1.0;
}

// Side view, toe to the right, y down. 0 outside, 1 upper, 2 sole.
int silhouette(double x, double y) {
  if (y >= 0.22 && y <= 0.36 && in_ellipse(x, y, 0.0, 0.29, 0.9, 0.1)) return 2;
  if (y <= 0.24 && in_ellipse(x, y, 0.05, 0.12, 0.82, 0.3)) return 1;
  if (y <= 0.24 && in_ellipse(x, y, -0.55, -0.05, 0.3, 0.4)) return 1;
  return 0;
}

Image procedural_shoe(std::uint64_t texture_seed, std::uint64_t seed, int size) {
  Rng rng(derive_seed(seed, texture_seed ^ 0x5100e));
  const TextureParams upper = random_texture(rng, 0.05, 0.95);
  Eigen::Vector3d sole_color = Eigen::Vector3d::Constant(uniform(rng, 0.05, 0.95));
  const double background = uniform(rng, 0.85, 1.0);
  const double angle = uniform(rng, -0.35, 0.35);
  const double zoom = uniform(rng, 0.8, 1.1);
  const bool flip = uniform(rng, 0, 1) < 0.5;
  const double ox = uniform(rng, -0.08, 0.08);
  const double oy = uniform(rng, -0.08, 0.08);
  const double ca = std::cos(angle);
  const double sa = std::sin(angle);

  Image img(3, size, size);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) {
      const double px = 2.0 * (x + 0.5) / size - 1.0 - ox;
      const double py = 2.0 * (y + 0.5) / size - 1.0 - oy;
      double sx = (ca * px + sa * py) / zoom;
      const double sy = (-sa * px + ca * py) / zoom;
      if (flip) sx = -sx;
      const int part = silhouette(sx, sy);
      Eigen::Vector3d color;
      if (part == 0) {
        color = Eigen::Vector3d::Constant(background);
      } else if (part == 2) {
        color = sole_color;
      } else {
        const double shade = 0.8 + 0.2 * std::clamp(0.5 - sy, 0.0, 1.0);
        color = shade * texture_color(upper, sx, sy);
      }
      for (int c = 0; c < 3; ++c) img.at(c, y, x) = static_cast<float>(std::clamp(color(c), 0.0, 1.0));
    }
  }
  return img;
}

bool is_png(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext == ".png";
}

}  // namespace

ShoeStyleSource ShoeStyleSource::procedural(std::uint64_t texture_seed) {
  ShoeStyleSource s;
  s.mode = Mode::kProcedural;
  s.texture_seed = texture_seed;
  return s;
}

ShoeStyleSource ShoeStyleSource::from_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("shoe image directory not found: " + dir.string());
  ShoeStyleSource s;
  s.mode = Mode::kDirectory;
  s.directory = dir;
  std::vector<fs::path> candidates;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && is_png(e.path())) candidates.push_back(e.path());
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& p : candidates) {
    try {
      read_png(p, 3);
      s.images.push_back(p);
    } catch (const Error&) {
    }
  }
  if (s.images.empty()) throw IoError("no readable PNG images in " + dir.string());
  return s;
}

ShoeStyleSource ShoeStyleSource::parse(const std::string& spec) {
  if (spec.empty() || spec == "procedural") return procedural();
  return from_directory(spec);
}

Image sample_shoe_image(const ShoeStyleSource& source, std::uint64_t seed, int size) {
  if (size <= 0) throw InvalidArgument("shoe image size must be positive");
  if (source.mode == ShoeStyleSource::Mode::kProcedural) {
    return procedural_shoe(source.texture_seed, seed, size);
  }
  if (source.images.empty()) throw IoError("shoe source has no images");
  const std::size_t pick = mix_seed(seed) % source.images.size();
  const Image img = read_png(source.images[pick], 3);
  return resize_bilinear(center_crop_square(img), size, size);
}

}  // namespace footcontact
