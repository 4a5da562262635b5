// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Patch-transformer image encoder, dense-prediction decoders for the foot
// mask and pixel height, and the ground feature encoder / normal head.

#pragma once

#include <array>
#include <vector>

#include "footcontact/nn.hpp"

namespace footcontact {

struct EncoderConfig {
  int resolution = 224;
  int patch = 16;
  int dim = 64;
  int depth = 4;
  int heads = 4;
  int mlp_ratio = 4;

  int grid() const { return resolution / patch; }
  void validate() const;
};

// 3 x (R*R) image in [-1, 1] -> (3*p*p) x (h*w) patch columns, pixel order
// within a patch is (channel, dy, dx).
Matrix patchify(const Matrix& image, int resolution, int patch);

struct EncoderOutput {
  ag::Var feature;                     // dim x (h*w)
  std::vector<ag::Var> intermediates;  // one per block, same shape
};

class ImageEncoder {
 public:
  ImageEncoder() = default;
  ImageEncoder(ParamStore& store, const EncoderConfig& config, Rng& rng);

  // image: 3 x (R*R) with R the configured resolution.
  EncoderOutput operator()(const Ctx& ctx, const Matrix& image) const;
  const EncoderConfig& config() const { return config_; }

 private:
  struct Block {
    LayerNorm ln1, ln2;
    MultiHeadAttention attn;
    FeedForward ff;
  };
  EncoderConfig config_;
  Linear embed_;
  Param* pos_ = nullptr;
  std::vector<Block> blocks_;
  LayerNorm final_ln_;
};

// Reassembles four same-size grids, fuses them coarse to fine with
// residual conv units, upsamples and emits one channel at H x W.
class DptDecoder {
 public:
  DptDecoder() = default;
  DptDecoder(ParamStore& store, const std::string& name, ParamGroup group,
             int in_channels, int features, Rng& rng);

  ag::Var operator()(const Ctx& ctx, const std::vector<ag::Var>& levels, int out_height,
                     int out_width) const;

 private:
  struct Rcu {
    Conv2d c1, c2;
    ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
  };
  std::array<Conv2d, 4> project_;
  std::array<Rcu, 4> skip_rcu_;
  std::array<Rcu, 4> out_rcu_;
  Conv2d refine_;
  Conv2d head_;
};

// Foot-mask logits at H x W from the encoder intermediates.
class MaskDecoder {
 public:
  MaskDecoder() = default;
  MaskDecoder(ParamStore& store, int in_channels, int features, Rng& rng);
  ag::Var operator()(const Ctx& ctx, const EncoderOutput& enc, int height, int width) const;

 private:
  DptDecoder dpt_;
};

// 1 x (H*W) binary mask from logits (probability > 0.5).
Matrix binarize_mask(const Matrix& logits);
// Nearest resampling of a 1 x (H*W) mask to h x w.
Matrix mask_to_grid(const Matrix& mask, int height, int width, int grid_h, int grid_w);

using GroundPyramid = std::array<ag::Var, 4>;

class GroundEncoder {
 public:
  GroundEncoder() = default;
  GroundEncoder(ParamStore& store, int channels, Rng& rng);
  GroundPyramid operator()(const Ctx& ctx, const ag::Var& f) const;

 private:
  struct Level {
    Conv2d c3, c1;
  };
  std::array<Level, 4> levels_;
};

// softplus head scaled by max(H, W); pixel units.
class PixelHeightDecoder {
 public:
  PixelHeightDecoder() = default;
  PixelHeightDecoder(ParamStore& store, int channels, int features, Rng& rng);
  ag::Var operator()(const Ctx& ctx, const GroundPyramid& pyramid, int height, int width) const;
  // Before the max(H, W) scaling.
  ag::Var normalized(const Ctx& ctx, const GroundPyramid& pyramid, int height, int width) const;

 private:
  DptDecoder dpt_;
};

struct NormalPrediction {
  ag::Var normal;  // 3 x 1, unit length
  bool all_masked = false;
};

class NormalDecoder {
 public:
  NormalDecoder() = default;
  NormalDecoder(ParamStore& store, int channels, int hidden, Rng& rng);
  // foot_mask: binary 1 x (h*w) at the grid of f_g4.
  NormalPrediction operator()(const Ctx& ctx, const ag::Var& f_g4, const Matrix& foot_mask) const;

 private:
  Linear fc1_, fc2_;
};

}  // namespace footcontact
