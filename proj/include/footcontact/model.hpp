// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// The assembled contact network: backbone, randomization adapters, ground
// heads and the two contact branches sharing one parameter store.

#pragma once

#include <memory>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "footcontact/backbone_ground.hpp"
#include "footcontact/contact_head.hpp"
#include "footcontact/foot_mesh.hpp"
#include "footcontact/image.hpp"
#include "footcontact/style_randomization.hpp"

namespace footcontact {

struct ModelConfig {
  EncoderConfig encoder;
  int dpt_features = 32;
  int attention_channels = 256;
  double dropout = 0.2;
  int normal_hidden = 128;
  ContactDecoderConfig decoder;
  std::uint64_t mesh_seed = 0;
  std::uint64_t init_seed = 0;

  // 64 x 64 input, 8 x 8 grid.
  static ModelConfig desk();
  // 224 x 224 input, 14 x 14 grid.
  static ModelConfig paper();
  void validate() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

struct BranchModules {
  AttentionFusion fusion;
  ContactAdapter adapter;
  ContactDecoder decoder;
};

struct BranchOutput {
  GroundPyramid ground;
  ag::Var pixel_height;  // 1 x (H*W)
  NormalPrediction normal;
  AttentionWeights attention;
  ag::Var contact_feature;
  ag::Var logits;                   // 1 x V
  std::vector<ag::Var> level_logits;  // vertex, joint11, joint3
};

struct Inference {
  Vector logits;
  std::vector<Vector> probs;  // vertex, joint11, joint3
  Matrix mask_prob;           // 1 x (H*W)
  Matrix pixel_height;        // 1 x (H*W)
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
  int height = 0;
  int width = 0;
};

class FootContactModel {
 public:
  explicit FootContactModel(const ModelConfig& config);
  FootContactModel(const FootContactModel&) = delete;
  FootContactModel& operator=(const FootContactModel&) = delete;

  const ModelConfig& config() const { return config_; }
  ParamStore& params() { return *store_; }
  const ParamStore& params() const { return *store_; }
  const FootMesh& mesh() const { return mesh_; }
  const std::vector<RegressorMatrix>& regressors() const { return regressors_; }
  int resolution() const { return config_.encoder.resolution; }

  // Ground heads, fusion, adapter and decoder of one branch on a randomized
  // feature. foot_mask is binary at the feature grid. detach_decoder_input
  // severs the decoder's input (style loss routing).
  BranchOutput run_branch(const Ctx& ctx, const BranchModules& branch, const ag::Var& feature,
                          const Matrix& foot_mask, bool detach_decoder_input = false) const;

  // Eval-mode prediction on an image of any size (resized bilinearly).
  Inference predict(const Image& image) const;

  ImageEncoder encoder;
  MaskDecoder mask_decoder;
  Adapter adapter_prev;
  Adapter adapter_after;
  GroundEncoder ground_encoder;
  PixelHeightDecoder pixel_height;
  NormalDecoder normal;
  BranchModules main;
  BranchModules style;

 private:
  ModelConfig config_;
  std::unique_ptr<ParamStore> store_;
  FootMesh mesh_;
  std::vector<RegressorMatrix> regressors_;
};

}  // namespace footcontact
