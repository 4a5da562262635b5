// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Ground/branch attention fusion, the contact adapter, the query-token
// contact decoder and the multi-level projection of its logits.

#pragma once

#include <optional>
#include <vector>

#include "footcontact/foot_mesh.hpp"
#include "footcontact/nn.hpp"

namespace footcontact {

struct AttentionWeights {
  Matrix w_g;  // 1 x (h*w)
  Matrix w_r;
};

class AttentionFusion {
 public:
  AttentionFusion() = default;
  AttentionFusion(ParamStore& store, const std::string& name, ParamGroup group, int channels,
                  int hidden, double dropout, Rng& rng);

  // Dropout runs only when ctx.training (and then needs ctx.rng).
  // forced_wg replaces the learned ground weight map (w_r = 1 - w_g).
  ag::Var operator()(const Ctx& ctx, const ag::Var& f_branch, const ag::Var& f_ground,
                     AttentionWeights* weights = nullptr,
                     const std::optional<Matrix>& forced_wg = std::nullopt) const;

 private:
  Conv2d reduce_;
  Conv2d logits_;
  double dropout_ = 0.0;
};

// relu(conv1x1(x)).
class ContactAdapter {
 public:
  ContactAdapter() = default;
  ContactAdapter(ParamStore& store, const std::string& name, ParamGroup group, int channels,
                 Rng& rng);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
  // Pre-activation output, for linearity probes.
  ag::Var linear(const Ctx& ctx, const ag::Var& x) const { return conv_(ctx, x); }

 private:
  Conv2d conv_;
};

struct ContactDecoderConfig {
  int vertices = kNumFootVertices;
  int dim = 32;
  int depth = 2;
  int heads = 4;
  int ff_ratio = 4;
  bool positional = true;

  void validate() const;
};

class ContactDecoder {
 public:
  ContactDecoder() = default;
  ContactDecoder(ParamStore& store, const std::string& name, ParamGroup group, int in_channels,
                 int grid_h, int grid_w, const ContactDecoderConfig& config, Rng& rng);

  // 1 x V vertex logits, contact initialization included.
  ag::Var operator()(const Ctx& ctx, const ag::Var& f_c) const;

 private:
  struct Block {
    LayerNorm ln_self, ln_cross, ln_ff;
    MultiHeadAttention self_attn, cross_attn;
    FeedForward ff;
  };
  ContactDecoderConfig config_;
  int tokens_ = 0;
  Linear memory_proj_;
  Param* pos_ = nullptr;
  Param* queries_ = nullptr;
  LayerNorm memory_ln_;
  std::vector<Block> blocks_;
  LayerNorm final_ln_;
  Linear head_;
  Param* contact_init_ = nullptr;
};

// J_i * logits for each regressor (each 1 x rows).
std::vector<ag::Var> project_logits(const ag::Var& logits,
                                    const std::vector<RegressorMatrix>& regressors);
// sigmoid(J_i * logits).
std::vector<Vector> multi_level_probs(const Vector& logits,
                                      const std::vector<RegressorMatrix>& regressors);

}  // namespace footcontact
