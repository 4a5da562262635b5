// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/contact_head.hpp"

#include <string>

namespace footcontact {

using ag::Var;

AttentionFusion::AttentionFusion(ParamStore& store, const std::string& name, ParamGroup group,
                                 int channels, int hidden, double dropout, Rng& rng)
    : reduce_(store, name + ".reduce", group, 2 * channels, hidden, 3, rng),
      logits_(store, name + ".logits", group, hidden, 2, 1, rng),
      dropout_(dropout) {
  if (!(dropout >= 0.0 && dropout < 1.0)) throw InvalidArgument(name + ": dropout must be in [0, 1)");
}

Var AttentionFusion::operator()(const Ctx& ctx, const Var& f_branch, const Var& f_ground,
                                AttentionWeights* weights,
                                const std::optional<Matrix>& forced_wg) const {
  if (f_branch.height() != f_ground.height() || f_branch.width() != f_ground.width() ||
      f_branch.rows() != f_ground.rows()) {
    throw InvalidArgument("attention fusion: branch and ground features differ in shape");
  }
  const int h = f_branch.height();
  const int w = f_branch.width();
  Var wg, wr;
  if (forced_wg) {
    if (forced_wg->rows() != 1 || forced_wg->cols() != f_branch.cols()) {
      throw InvalidArgument("attention fusion: forced weights must be 1 x (h*w)");
    }
    wg = ag::constant(*forced_wg, h, w);
    wr = ag::constant((1.0 - forced_wg->array()).matrix(), h, w);
  } else {
    Var x = ag::relu(reduce_(ctx, ag::concat_rows({f_branch, f_ground})));
    if (ctx.training && dropout_ > 0.0) {
      if (!ctx.rng) throw InvalidArgument("attention fusion: training mode needs an rng");
      x = ag::dropout(x, dropout_, *ctx.rng);
    }
    const Var sm = ag::softmax_cols(logits_(ctx, x));
    wg = ag::slice_rows(sm, 0, 1);
    wr = ag::slice_rows(sm, 1, 1);
  }
  if (weights) *weights = {wg.value(), wr.value()};
  const Var ones = ag::constant(Matrix::Ones(f_branch.rows(), 1));
  const Var fused = ag::add(ag::mul(ag::matmul(ones, wg), f_ground),
                            ag::mul(ag::matmul(ones, wr), f_branch));
  return ag::as_grid(fused, h, w);
}

ContactAdapter::ContactAdapter(ParamStore& store, const std::string& name, ParamGroup group,
                               int channels, Rng& rng)
    : conv_(store, name, group, channels, channels, 1, rng) {}

Var ContactAdapter::operator()(const Ctx& ctx, const Var& x) const {
  return ag::relu(conv_(ctx, x));
}

void ContactDecoderConfig::validate() const {
  if (vertices <= 0 || dim <= 0 || depth <= 0 || heads <= 0 || ff_ratio <= 0) {
    throw InvalidArgument("contact decoder sizes must be positive");
  }
  if (dim % heads != 0) throw InvalidArgument("contact decoder dim must be divisible by heads");
}

ContactDecoder::ContactDecoder(ParamStore& store, const std::string& name, ParamGroup group,
                               int in_channels, int grid_h, int grid_w,
                               const ContactDecoderConfig& config, Rng& rng)
    : config_(config), tokens_(grid_h * grid_w) {
  config_.validate();
  const int d = config_.dim;
  memory_proj_ = Linear(store, name + ".memory", group, in_channels, d, rng);
  if (config_.positional) pos_ = &store.add(name + ".pos", group, init::normal(d, tokens_, 0.02, rng));
  queries_ = &store.add(name + ".queries", group, init::normal(d, config_.vertices, 0.02, rng));
  memory_ln_ = LayerNorm(store, name + ".memory_ln", group, d);
  for (int b = 0; b < config_.depth; ++b) {
    const std::string n = name + ".block" + std::to_string(b);
    Block blk;
    blk.ln_self = LayerNorm(store, n + ".ln_self", group, d);
    blk.self_attn = MultiHeadAttention(store, n + ".self", group, d, config_.heads, rng);
    blk.ln_cross = LayerNorm(store, n + ".ln_cross", group, d);
    blk.cross_attn = MultiHeadAttention(store, n + ".cross", group, d, config_.heads, rng);
    blk.ln_ff = LayerNorm(store, n + ".ln_ff", group, d);
    blk.ff = FeedForward(store, n + ".ff", group, d, d * config_.ff_ratio, rng);
    blocks_.push_back(std::move(blk));
  }
  final_ln_ = LayerNorm(store, name + ".ln", group, d);
  head_ = Linear(store, name + ".head", group, d, 1, rng);
  contact_init_ = &store.add(name + ".contact_init", group, init::zeros(1, config_.vertices));
}

Var ContactDecoder::operator()(const Ctx& ctx, const Var& f_c) const {
  if (f_c.cols() != tokens_) {
    throw InvalidArgument("contact decoder: feature grid has " + std::to_string(f_c.cols()) +
                          " positions, expected " + std::to_string(tokens_));
  }
  Var mem = memory_proj_(ctx, f_c);
  if (pos_) mem = ag::add(mem, ctx.p(*pos_));
  mem = memory_ln_(ctx, mem);
  Var q = ctx.p(*queries_);
  for (const Block& blk : blocks_) {
    const Var s = blk.ln_self(ctx, q);
    q = ag::add(q, blk.self_attn(ctx, s, s));
    q = ag::add(q, blk.cross_attn(ctx, blk.ln_cross(ctx, q), mem));
    q = ag::add(q, blk.ff(ctx, blk.ln_ff(ctx, q)));
  }
  return ag::add(head_(ctx, final_ln_(ctx, q)), ctx.p(*contact_init_));
}

std::vector<Var> project_logits(const Var& logits, const std::vector<RegressorMatrix>& regressors) {
  std::vector<Var> out;
  out.reserve(regressors.size());
  for (const RegressorMatrix& r : regressors) {
    if (r.weights.cols() != logits.cols()) {
      throw InvalidArgument(std::string("regressor ") + level_name(r.level) +
                            " does not match the logit count");
    }
    out.push_back(ag::matmul(logits, ag::constant(r.weights), false, true));
  }
  return out;
}

std::vector<Vector> multi_level_probs(const Vector& logits,
                                      const std::vector<RegressorMatrix>& regressors) {
  std::vector<Vector> out;
  out.reserve(regressors.size());
  for (const RegressorMatrix& r : regressors) {
    if (r.weights.cols() != logits.size()) {
      throw InvalidArgument(std::string("regressor ") + level_name(r.level) +
                            " does not match the logit count");
    }
    const Vector z = r.weights * logits;
    out.push_back((1.0 / (1.0 + (-z.array()).exp())).matrix());
  }
  return out;
}

}  // namespace footcontact
