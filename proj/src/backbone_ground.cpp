// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/backbone_ground.hpp"

#include <algorithm>
#include <string>

namespace footcontact {

using ag::Var;

void EncoderConfig::validate() const {
  if (resolution <= 0 || patch <= 0) throw InvalidArgument("encoder resolution and patch must be positive");
  if (resolution % patch != 0) {
    throw InvalidArgument("encoder resolution " + std::to_string(resolution) +
                          " is not divisible by patch " + std::to_string(patch));
  }
  if (dim <= 0 || depth <= 0 || heads <= 0 || mlp_ratio <= 0) {
    throw InvalidArgument("encoder dim, depth, heads and mlp_ratio must be positive");
  }
  if (dim % heads != 0) throw InvalidArgument("encoder dim must be divisible by heads");
}

Matrix patchify(const Matrix& image, int resolution, int patch) {
  if (image.rows() != 3 || image.cols() != static_cast<Eigen::Index>(resolution) * resolution) {
    throw InvalidArgument("encoder expects a 3 x " + std::to_string(resolution) + "x" +
                          std::to_string(resolution) + " image");
  }
  const int g = resolution / patch;
  Matrix out(3 * patch * patch, static_cast<Eigen::Index>(g) * g);
  for (int py = 0; py < g; ++py) {
    for (int px = 0; px < g; ++px) {
      const Eigen::Index col = static_cast<Eigen::Index>(py) * g + px;
      Eigen::Index row = 0;
      for (int c = 0; c < 3; ++c)
        for (int dy = 0; dy < patch; ++dy)
          for (int dx = 0; dx < patch; ++dx)
            out(row++, col) = image(c, static_cast<Eigen::Index>(py * patch + dy) * resolution +
                                           px * patch + dx);
    }
  }
  return out;
}

ImageEncoder::ImageEncoder(ParamStore& store, const EncoderConfig& config, Rng& rng)
    : config_(config) {
  config_.validate();
  const int d = config_.dim;
  const int tokens = config_.grid() * config_.grid();
  embed_ = Linear(store, "encoder.embed", ParamGroup::kBackbone, 3 * config_.patch * config_.patch,
                  d, rng);
  pos_ = &store.add("encoder.pos", ParamGroup::kBackbone, init::normal(d, tokens, 0.02, rng));
  for (int b = 0; b < config_.depth; ++b) {
    const std::string n = "encoder.block" + std::to_string(b);
    Block blk;
    blk.ln1 = LayerNorm(store, n + ".ln1", ParamGroup::kBackbone, d);
    blk.attn = MultiHeadAttention(store, n + ".attn", ParamGroup::kBackbone, d, config_.heads, rng);
    blk.ln2 = LayerNorm(store, n + ".ln2", ParamGroup::kBackbone, d);
    blk.ff = FeedForward(store, n + ".ff", ParamGroup::kBackbone, d, d * config_.mlp_ratio, rng);
    blocks_.push_back(std::move(blk));
  }
  final_ln_ = LayerNorm(store, "encoder.ln", ParamGroup::kBackbone, d);
}

EncoderOutput ImageEncoder::operator()(const Ctx& ctx, const Matrix& image) const {
  const int g = config_.grid();
  Var x = embed_(ctx, ag::constant(patchify(image, config_.resolution, config_.patch)));
  x = ag::add(x, ctx.p(*pos_));
  EncoderOutput out;
  for (const Block& blk : blocks_) {
    const Var h = blk.ln1(ctx, x);
    x = ag::add(x, blk.attn(ctx, h, h));
    x = ag::add(x, blk.ff(ctx, blk.ln2(ctx, x)));
    out.intermediates.push_back(ag::as_grid(x, g, g));
  }
  out.feature = ag::as_grid(final_ln_(ctx, x), g, g);
  return out;
}

Var DptDecoder::Rcu::operator()(const Ctx& ctx, const Var& x) const {
  return ag::add(x, c2(ctx, ag::relu(c1(ctx, ag::relu(x)))));
}

DptDecoder::DptDecoder(ParamStore& store, const std::string& name, ParamGroup group,
                       int in_channels, int features, Rng& rng) {
  if (features < 2 || features % 2 != 0) throw InvalidArgument(name + ": features must be even");
  for (int l = 0; l < 4; ++l) {
    const std::string n = name + ".level" + std::to_string(l);
    project_[l] = Conv2d(store, n + ".project", group, in_channels, features, 1, rng);
    skip_rcu_[l] = {Conv2d(store, n + ".rcu1.conv1", group, features, features, 3, rng),
                    Conv2d(store, n + ".rcu1.conv2", group, features, features, 3, rng)};
    out_rcu_[l] = {Conv2d(store, n + ".rcu2.conv1", group, features, features, 3, rng),
                   Conv2d(store, n + ".rcu2.conv2", group, features, features, 3, rng)};
  }
  refine_ = Conv2d(store, name + ".refine", group, features, features / 2, 3, rng);
  head_ = Conv2d(store, name + ".head", group, features / 2, 1, 1, rng);
}

Var DptDecoder::operator()(const Ctx& ctx, const std::vector<Var>& levels, int out_height,
                           int out_width) const {
  if (levels.empty()) throw InvalidArgument("dense decoder needs feature levels");
  // Four taps spread evenly over the blocks; shallow encoders repeat levels.
  const std::size_t n = levels.size();
  std::size_t tap[4];
  for (std::size_t l = 0; l < 4; ++l) tap[l] = ((l + 1) * n + 3) / 4 - 1;
  const int h = levels[0].height();
  const int w = levels[0].width();
  Var x;
  for (int l = 3; l >= 0; --l) {
    const Var& f = levels[tap[l]];
    if (f.height() != h || f.width() != w) throw InvalidArgument("dense decoder levels differ in size");
    const Var skip = skip_rcu_[l](ctx, project_[l](ctx, f));
    x = out_rcu_[l](ctx, x ? ag::add(x, skip) : skip);
  }
  x = ag::resample(x, bilinear_operator(h, w, 2 * h, 2 * w), 2 * h, 2 * w);
  x = head_(ctx, ag::relu(refine_(ctx, x)));
  // The 1x1 head commutes with bilinear resampling, so it runs first.
  return ag::resample(x, bilinear_operator(2 * h, 2 * w, out_height, out_width), out_height,
                      out_width);
}

MaskDecoder::MaskDecoder(ParamStore& store, int in_channels, int features, Rng& rng)
    : dpt_(store, "mask_decoder", ParamGroup::kMaskDecoder, in_channels, features, rng) {}

Var MaskDecoder::operator()(const Ctx& ctx, const EncoderOutput& enc, int height,
                            int width) const {
  return dpt_(ctx, enc.intermediates, height, width);
}

Matrix binarize_mask(const Matrix& logits) {
  return (logits.array() > 0.0).cast<double>().matrix();
}

Matrix mask_to_grid(const Matrix& mask, int height, int width, int grid_h, int grid_w) {
  if (mask.rows() != 1 || mask.cols() != static_cast<Eigen::Index>(height) * width) {
    throw InvalidArgument("mask_to_grid: mask is not 1 x (height*width)");
  }
  return mask * *nearest_operator(height, width, grid_h, grid_w);
}

GroundEncoder::GroundEncoder(ParamStore& store, int channels, Rng& rng) {
  for (int l = 0; l < 4; ++l) {
    const std::string n = "ground.level" + std::to_string(l);
    levels_[l] = {Conv2d(store, n + ".conv3", ParamGroup::kGround, channels, channels, 3, rng),
                  Conv2d(store, n + ".conv1", ParamGroup::kGround, channels, channels, 1, rng)};
  }
}

GroundPyramid GroundEncoder::operator()(const Ctx& ctx, const Var& f) const {
  GroundPyramid out;
  Var x = f;
  for (int l = 0; l < 4; ++l) {
    x = ag::relu(levels_[l].c1(ctx, ag::relu(levels_[l].c3(ctx, x))));
    out[l] = x;
  }
  return out;
}

PixelHeightDecoder::PixelHeightDecoder(ParamStore& store, int channels, int features, Rng& rng)
    : dpt_(store, "pixel_height", ParamGroup::kGround, channels, features, rng) {}

Var PixelHeightDecoder::normalized(const Ctx& ctx, const GroundPyramid& pyramid, int height,
                                   int width) const {
  return ag::softplus(dpt_(ctx, {pyramid.begin(), pyramid.end()}, height, width));
}

Var PixelHeightDecoder::operator()(const Ctx& ctx, const GroundPyramid& pyramid, int height,
                                   int width) const {
  return ag::scale(normalized(ctx, pyramid, height, width),
                   static_cast<double>(std::max(height, width)));
}

NormalDecoder::NormalDecoder(ParamStore& store, int channels, int hidden, Rng& rng)
    : fc1_(store, "normal.fc1", ParamGroup::kGround, channels, hidden, rng),
      fc2_(store, "normal.fc2", ParamGroup::kGround, hidden, 3, rng) {}

NormalPrediction NormalDecoder::operator()(const Ctx& ctx, const Var& f_g4,
                                           const Matrix& foot_mask) const {
  if (foot_mask.rows() != 1 || foot_mask.cols() != f_g4.cols()) {
    throw InvalidArgument("normal decoder: mask does not match the feature grid");
  }
  const Matrix keep = Matrix::Ones(f_g4.rows(), 1) * (1.0 - foot_mask.array()).matrix();
  const Var pooled = ag::row_mean(ag::mul_const(f_g4, keep));
  const Var n = ag::tanh(fc2_(ctx, fc1_(ctx, pooled)));
  const bool all_masked = keep.sum() == 0.0;
  if (n.value().norm() < 1e-12) {
    // No direction to normalize; fall back to camera up (-y).
    return {ag::constant(Eigen::Vector3d(0.0, -1.0, 0.0)), all_masked};
  }
  return {ag::l2_normalize_cols(n), all_masked};
}

}  // namespace footcontact
