// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "footcontact/autograd.hpp"

namespace footcontact {

// Planar (channel-major) float image, values nominally in [0, 1].
struct Image {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<float> data;

  Image() = default;
  Image(int c, int h, int w, float fill = 0.0f)
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {}

  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * height + y) * width + x;
  }
  float& at(int c, int y, int x) { return data[index(c, y, x)]; }
  float at(int c, int y, int x) const { return data[index(c, y, x)]; }
  bool empty() const { return data.empty(); }
};

Image resize_bilinear(const Image& img, int height, int width);
// Largest centred square crop.
Image center_crop_square(const Image& img);

// channels x (h*w) matrix in [-1, 1] as fed to the network.
Matrix to_network_input(const Image& img);

// 8-bit PNG; 1 channel is written as grayscale, 3 as RGB.
void write_png(const Image& img, const std::filesystem::path& path);
// Decodes to `channels` (1 or 3) regardless of the file's colour type.
Image read_png(const std::filesystem::path& path, int channels = 3);

// Single-channel PFM (float32, little endian). NaN is preserved.
void write_pfm(const std::filesystem::path& path, const std::vector<float>& values,
               int height, int width);
std::vector<float> read_pfm(const std::filesystem::path& path, int& height, int& width);

}  // namespace footcontact
