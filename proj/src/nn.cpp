// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/nn.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

namespace footcontact {

Param& ParamStore::add(std::string name, ParamGroup group, Matrix init) {
  if (index_.count(name)) throw InvalidArgument("duplicate parameter: " + name);
  auto p = std::make_unique<Param>();
  p->name = std::move(name);
  p->group = group;
  p->value = std::move(init);
  p->grad = Matrix::Zero(p->value.rows(), p->value.cols());
  Param* raw = p.get();
  index_.emplace(raw->name, raw);
  params_.push_back(std::move(p));
  return *raw;
}

Param* ParamStore::find(const std::string& name) {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

const Param* ParamStore::find(const std::string& name) const {
  auto it = index_.find(name);
  return it == index_.end() ? nullptr : it->second;
}

Param& ParamStore::at(const std::string& name) {
  Param* p = find(name);
  if (!p) throw InvalidArgument("unknown parameter: " + name);
  return *p;
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += static_cast<std::size_t>(p->value.size());
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p->grad.setZero(p->value.rows(), p->value.cols());
}

namespace init {

Matrix zeros(Eigen::Index rows, Eigen::Index cols) { return Matrix::Zero(rows, cols); }

Matrix constant(Eigen::Index rows, Eigen::Index cols, double v) {
  return Matrix::Constant(rows, cols, v);
}

Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in,
                      double fan_out, Rng& rng) {
  const double b = std::sqrt(6.0 / (fan_in + fan_out));
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -b, b);
  return m;
}

Matrix normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = gaussian(rng, 0.0, stddev);
  return m;
}

}  // namespace init

Linear::Linear(ParamStore& store, const std::string& name, ParamGroup group, int in,
               int out, Rng& rng, bool with_bias) {
  weight = &store.add(name + ".weight", group, init::xavier_uniform(out, in, in, out, rng));
  if (with_bias) bias = &store.add(name + ".bias", group, init::zeros(out, 1));
}

ag::Var Linear::operator()(const Ctx& ctx, const ag::Var& x) const {
  ag::Var y = ag::matmul(ctx.p(*weight), x);
  if (bias) y = ag::add_col(y, ctx.p(*bias));
  if (x.height() > 0) y = ag::as_grid(y, x.height(), x.width());
  return y;
}

Conv2d::Conv2d(ParamStore& store, const std::string& name, ParamGroup group, int in,
               int out, int k, Rng& rng, bool with_bias)
    : kernel(k) {
  const double fan_in = static_cast<double>(in) * k * k;
  const double fan_out = static_cast<double>(out) * k * k;
  weight = &store.add(name + ".weight", group,
                      init::xavier_uniform(out, in * k * k, fan_in, fan_out, rng));
  if (with_bias) bias = &store.add(name + ".bias", group, init::zeros(out, 1));
}

ag::Var Conv2d::operator()(const Ctx& ctx, const ag::Var& x) const {
  return ag::conv2d(x, ctx.p(*weight), bias ? ctx.p(*bias) : ag::Var(), kernel);
}

LayerNorm::LayerNorm(ParamStore& store, const std::string& name, ParamGroup group,
                     int dim) {
  gamma = &store.add(name + ".gamma", group, init::constant(dim, 1, 1.0));
  beta = &store.add(name + ".beta", group, init::zeros(dim, 1));
}

ag::Var LayerNorm::operator()(const Ctx& ctx, const ag::Var& x) const {
  return ag::layer_norm_cols(x, ctx.p(*gamma), ctx.p(*beta));
}

MultiHeadAttention::MultiHeadAttention(ParamStore& store, const std::string& name,
                                       ParamGroup group, int d, int h, Rng& rng)
    : q(store, name + ".q", group, d, d, rng),
      k(store, name + ".k", group, d, d, rng),
      v(store, name + ".v", group, d, d, rng),
      o(store, name + ".o", group, d, d, rng),
      heads(h),
      dim(d) {
  if (d % h != 0) throw InvalidArgument(name + ": dim must be divisible by heads");
}

ag::Var MultiHeadAttention::operator()(const Ctx& ctx, const ag::Var& queries,
                                       const ag::Var& memory) const {
  const int head_dim = dim / heads;
  const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(head_dim));
  ag::Var qv = q(ctx, queries);
  ag::Var kv = k(ctx, memory);
  ag::Var vv = v(ctx, memory);
  std::vector<ag::Var> outs;
  outs.reserve(heads);
  for (int hd = 0; hd < heads; ++hd) {
    ag::Var qh = ag::slice_rows(qv, hd * head_dim, head_dim);
    ag::Var kh = ag::slice_rows(kv, hd * head_dim, head_dim);
    ag::Var vh = ag::slice_rows(vv, hd * head_dim, head_dim);
    // scores: keys x queries; softmax over keys within each query column.
    ag::Var scores = ag::scale(ag::matmul(kh, qh, true, false), inv_sqrt);
    ag::Var attn = ag::softmax_cols(scores);
    outs.push_back(ag::matmul(vh, attn));
  }
  ag::Var merged = heads == 1 ? outs.front() : ag::concat_rows(outs);
  return o(ctx, merged);
}

FeedForward::FeedForward(ParamStore& store, const std::string& name, ParamGroup group,
                         int d, int hidden, Rng& rng)
    : fc1(store, name + ".fc1", group, d, hidden, rng),
      fc2(store, name + ".fc2", group, hidden, d, rng) {}

ag::Var FeedForward::operator()(const Ctx& ctx, const ag::Var& x) const {
  return fc2(ctx, ag::gelu(fc1(ctx, x)));
}

namespace {

using OpKey = std::tuple<int, int, int, int, int>;

std::shared_ptr<const SparseMatrix> cached(const OpKey& key,
                                           std::shared_ptr<const SparseMatrix> (*build)(int, int, int, int)) {
  static std::mutex mu;
  static std::map<OpKey, std::shared_ptr<const SparseMatrix>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto op = build(std::get<1>(key), std::get<2>(key), std::get<3>(key), std::get<4>(key));
  cache.emplace(key, op);
  return op;
}

std::shared_ptr<const SparseMatrix> build_bilinear(int in_h, int in_w, int out_h, int out_w) {
  std::vector<Eigen::Triplet<double>> trips;
  const double sy = static_cast<double>(in_h) / out_h;
  const double sx = static_cast<double>(in_w) / out_w;
  for (int i = 0; i < out_h; ++i) {
    double fy = std::clamp((i + 0.5) * sy - 0.5, 0.0, static_cast<double>(in_h - 1));
    const int y0 = static_cast<int>(std::floor(fy));
    const int y1 = std::min(y0 + 1, in_h - 1);
    const double wy = fy - y0;
    for (int j = 0; j < out_w; ++j) {
      double fx = std::clamp((j + 0.5) * sx - 0.5, 0.0, static_cast<double>(in_w - 1));
      const int x0 = static_cast<int>(std::floor(fx));
      const int x1 = std::min(x0 + 1, in_w - 1);
      const double wx = fx - x0;
      const int out = i * out_w + j;
      trips.emplace_back(y0 * in_w + x0, out, (1 - wy) * (1 - wx));
      trips.emplace_back(y0 * in_w + x1, out, (1 - wy) * wx);
      trips.emplace_back(y1 * in_w + x0, out, wy * (1 - wx));
      trips.emplace_back(y1 * in_w + x1, out, wy * wx);
    }
  }
  auto op = std::make_shared<SparseMatrix>(in_h * in_w, out_h * out_w);
  op->setFromTriplets(trips.begin(), trips.end());
  op->prune(0.0);
  return op;
}

std::shared_ptr<const SparseMatrix> build_nearest(int in_h, int in_w, int out_h, int out_w) {
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < out_h; ++i) {
    const int si = std::min(in_h - 1, static_cast<int>((i + 0.5) * in_h / out_h));
    for (int j = 0; j < out_w; ++j) {
      const int sj = std::min(in_w - 1, static_cast<int>((j + 0.5) * in_w / out_w));
      trips.emplace_back(si * in_w + sj, i * out_w + j, 1.0);
    }
  }
  auto op = std::make_shared<SparseMatrix>(in_h * in_w, out_h * out_w);
  op->setFromTriplets(trips.begin(), trips.end());
  return op;
}

}  // namespace

std::shared_ptr<const SparseMatrix> bilinear_operator(int in_h, int in_w, int out_h,
                                                      int out_w) {
  return cached({0, in_h, in_w, out_h, out_w}, &build_bilinear);
}

std::shared_ptr<const SparseMatrix> nearest_operator(int in_h, int in_w, int out_h,
                                                     int out_w) {
  return cached({1, in_h, in_w, out_h, out_w}, &build_nearest);
}

}  // namespace footcontact
