// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "footcontact/autograd.hpp"

namespace footcontact {

// Owns every learnable tensor of a model in registration order.
class ParamStore {
 public:
  ParamStore() = default;
  ParamStore(const ParamStore&) = delete;
  ParamStore& operator=(const ParamStore&) = delete;

  Param& add(std::string name, ParamGroup group, Matrix init);
  Param* find(const std::string& name);
  const Param* find(const std::string& name) const;
  Param& at(const std::string& name);

  const std::vector<std::unique_ptr<Param>>& params() const { return params_; }
  std::size_t scalar_count() const;
  void zero_grad();

 private:
  std::vector<std::unique_ptr<Param>> params_;
  std::unordered_map<std::string, Param*> index_;
};

// Forward-pass context.
//   training: dropout active.
//   frozen:   parameters enter the graph as constants (module freezing).
//   routing:  detach points sever gradients. Only whole-graph gradient
//             checks turn this off.
//   frozen_groups: bitmask of ParamGroups frozen individually.
struct Ctx {
  bool training = false;
  bool frozen = false;
  bool routing = true;
  std::uint32_t frozen_groups = 0;
  Rng* rng = nullptr;

  bool is_frozen(ParamGroup g) const {
    return frozen || ((frozen_groups >> static_cast<int>(g)) & 1u);
  }
  ag::Var p(Param& param) const { return ag::param_leaf(param, !is_frozen(param.group)); }
  ag::Var detach(const ag::Var& x) const { return routing ? ag::detach(x) : x; }
  Ctx with_frozen(bool f = true) const {
    Ctx c = *this;
    c.frozen = f && routing;
    return c;
  }
  // Freezes every group except `g`.
  Ctx only_group(ParamGroup g) const {
    Ctx c = *this;
    if (routing) c.frozen_groups = ~(1u << static_cast<int>(g));
    return c;
  }
  Ctx without_group(ParamGroup g) const {
    Ctx c = *this;
    if (routing) c.frozen_groups |= 1u << static_cast<int>(g);
    return c;
  }
};

namespace init {
Matrix zeros(Eigen::Index rows, Eigen::Index cols);
Matrix constant(Eigen::Index rows, Eigen::Index cols, double v);
// Uniform(-b, b) with b = sqrt(6 / (fan_in + fan_out)).
Matrix xavier_uniform(Eigen::Index rows, Eigen::Index cols, double fan_in,
                      double fan_out, Rng& rng);
Matrix normal(Eigen::Index rows, Eigen::Index cols, double stddev, Rng& rng);
}  // namespace init

// Dense layer on a d x N matrix: W x + b.
struct Linear {
  Param* weight = nullptr;
  Param* bias = nullptr;

  Linear() = default;
  Linear(ParamStore& store, const std::string& name, ParamGroup group, int in,
         int out, Rng& rng, bool with_bias = true);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
};

// k x k convolution (k in {1,3}) on a c x (h*w) grid.
struct Conv2d {
  Param* weight = nullptr;
  Param* bias = nullptr;
  int kernel = 1;

  Conv2d() = default;
  Conv2d(ParamStore& store, const std::string& name, ParamGroup group, int in,
         int out, int kernel, Rng& rng, bool with_bias = true);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
};

struct LayerNorm {
  Param* gamma = nullptr;
  Param* beta = nullptr;

  LayerNorm() = default;
  LayerNorm(ParamStore& store, const std::string& name, ParamGroup group, int dim);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
};

// Multi-head scaled dot-product attention; queries attend over memory.
struct MultiHeadAttention {
  Linear q, k, v, o;
  int heads = 1;
  int dim = 0;

  MultiHeadAttention() = default;
  MultiHeadAttention(ParamStore& store, const std::string& name, ParamGroup group,
                     int dim, int heads, Rng& rng);
  ag::Var operator()(const Ctx& ctx, const ag::Var& queries,
                     const ag::Var& memory) const;
};

struct FeedForward {
  Linear fc1, fc2;

  FeedForward() = default;
  FeedForward(ParamStore& store, const std::string& name, ParamGroup group,
              int dim, int hidden, Rng& rng);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
};

// Bilinear (align-corners=false) resampling operator between grids.
std::shared_ptr<const SparseMatrix> bilinear_operator(int in_h, int in_w, int out_h,
                                                      int out_w);
// Nearest-neighbour resampling operator (pixel-centre sampling).
std::shared_ptr<const SparseMatrix> nearest_operator(int in_h, int in_w, int out_h,
                                                     int out_w);

}  // namespace footcontact
