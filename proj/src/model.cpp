// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/model.hpp"

#include <nlohmann/json.hpp>

namespace footcontact {

using ag::Var;

ModelConfig ModelConfig::desk() {
  ModelConfig c;
  c.encoder.resolution = 64;
  c.encoder.patch = 8;
  return c;
}

ModelConfig ModelConfig::paper() { return ModelConfig{}; }

void ModelConfig::validate() const {
  encoder.validate();
  decoder.validate();
  if (dpt_features < 2 || dpt_features % 2 != 0) {
    throw InvalidArgument("model.dpt_features must be a positive even number");
  }
  if (attention_channels <= 0) throw InvalidArgument("model.attention_channels must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument("model.dropout must be in [0, 1)");
  if (normal_hidden <= 0) throw InvalidArgument("model.normal_hidden must be positive");
  if (decoder.vertices != kNumFootVertices) {
    throw InvalidArgument("model.decoder.vertices must equal the foot mesh size " +
                          std::to_string(kNumFootVertices));
  }
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{
      {"resolution", c.encoder.resolution}, {"patch", c.encoder.patch},
      {"dim", c.encoder.dim},               {"depth", c.encoder.depth},
      {"heads", c.encoder.heads},           {"mlp_ratio", c.encoder.mlp_ratio},
      {"dpt_features", c.dpt_features},     {"attention_channels", c.attention_channels},
      {"dropout", c.dropout},               {"normal_hidden", c.normal_hidden},
      {"decoder_dim", c.decoder.dim},       {"decoder_depth", c.decoder.depth},
      {"decoder_heads", c.decoder.heads},   {"decoder_ff_ratio", c.decoder.ff_ratio},
      {"decoder_positional", c.decoder.positional},
      {"mesh_seed", c.mesh_seed},           {"init_seed", c.init_seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  j.at("resolution").get_to(c.encoder.resolution);
  j.at("patch").get_to(c.encoder.patch);
  j.at("dim").get_to(c.encoder.dim);
  j.at("depth").get_to(c.encoder.depth);
  j.at("heads").get_to(c.encoder.heads);
  j.at("mlp_ratio").get_to(c.encoder.mlp_ratio);
  j.at("dpt_features").get_to(c.dpt_features);
  j.at("attention_channels").get_to(c.attention_channels);
  j.at("dropout").get_to(c.dropout);
  j.at("normal_hidden").get_to(c.normal_hidden);
  j.at("decoder_dim").get_to(c.decoder.dim);
  j.at("decoder_depth").get_to(c.decoder.depth);
  j.at("decoder_heads").get_to(c.decoder.heads);
  j.at("decoder_ff_ratio").get_to(c.decoder.ff_ratio);
  j.at("decoder_positional").get_to(c.decoder.positional);
  j.at("mesh_seed").get_to(c.mesh_seed);
  j.at("init_seed").get_to(c.init_seed);
}

FootContactModel::FootContactModel(const ModelConfig& config)
    : config_(config), store_(std::make_unique<ParamStore>()) {
  config_.validate();
  Rng rng(derive_seed(config_.init_seed, 0x11));
  const int d = config_.encoder.dim;
  const int g = config_.encoder.grid();
  ParamStore& s = *store_;
  encoder = ImageEncoder(s, config_.encoder, rng);
  mask_decoder = MaskDecoder(s, d, config_.dpt_features, rng);
  adapter_prev = Adapter(s, "adapter_prev", d, rng);
  adapter_after = Adapter(s, "adapter_after", d, rng);
  ground_encoder = GroundEncoder(s, d, rng);
  pixel_height = PixelHeightDecoder(s, d, config_.dpt_features, rng);
  normal = NormalDecoder(s, d, config_.normal_hidden, rng);
  main = {AttentionFusion(s, "main.fusion", ParamGroup::kFusionMain, d, config_.attention_channels,
                          config_.dropout, rng),
          ContactAdapter(s, "main.contact_adapter", ParamGroup::kFusionMain, d, rng),
          ContactDecoder(s, "main.decoder", ParamGroup::kDecoderMain, d, g, g, config_.decoder, rng)};
  style = {AttentionFusion(s, "style.fusion", ParamGroup::kFusionStyle, d,
                           config_.attention_channels, config_.dropout, rng),
           ContactAdapter(s, "style.contact_adapter", ParamGroup::kFusionStyle, d, rng),
           ContactDecoder(s, "style.decoder", ParamGroup::kDecoderStyle, d, g, g, config_.decoder,
                          rng)};
  mesh_ = build_canonical_foot_mesh(config_.mesh_seed);
  regressors_ = build_all_regressors(mesh_);
}

BranchOutput FootContactModel::run_branch(const Ctx& ctx, const BranchModules& branch,
                                          const Var& feature, const Matrix& foot_mask,
                                          bool detach_decoder_input) const {
  const int res = resolution();
  BranchOutput out;
  out.ground = ground_encoder(ctx, feature);
  out.pixel_height = pixel_height(ctx, out.ground, res, res);
  out.normal = normal(ctx, out.ground[3], foot_mask);
  const Var fused = branch.fusion(ctx, feature, out.ground[3], &out.attention);
  out.contact_feature = branch.adapter(ctx, fused);
  out.logits = branch.decoder(
      ctx, detach_decoder_input ? ctx.detach(out.contact_feature) : out.contact_feature);
  out.level_logits = project_logits(out.logits, regressors_);
  return out;
}

Inference FootContactModel::predict(const Image& image) const {
  if (image.channels != 3) throw InvalidArgument("predict: expected an RGB image");
  const int res = resolution();
  const Image input = resize_bilinear(image, res, res);
  const Ctx ctx;
  const EncoderOutput enc = encoder(ctx, to_network_input(input));
  const Var mask_logits = mask_decoder(ctx, enc, res, res);
  const int g = enc.feature.height();
  const Matrix mask_grid = mask_to_grid(binarize_mask(mask_logits.value()), res, res, g, g);
  // Without a shoe image the style statistics are the input's own.
  const Randomized ssi =
      style_randomize(ctx, enc.feature, enc.feature, adapter_prev, adapter_after, 1.0);
  const BranchOutput b = run_branch(ctx, main, ssi.out, mask_grid);

  Inference r;
  r.height = res;
  r.width = res;
  r.logits = b.logits.value().row(0).transpose();
  r.probs = multi_level_probs(r.logits, regressors_);
  r.mask_prob = (1.0 / (1.0 + (-mask_logits.value().array()).exp())).matrix();
  r.pixel_height = b.pixel_height.value();
  r.normal = b.normal.normal.value().col(0);
  return r;
}

}  // namespace footcontact
