// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Image-level random-convolution views and feature-level statistics
// transfer through residual adapters.

#pragma once

#include <cstdint>
#include <vector>

#include "footcontact/nn.hpp"

namespace footcontact {

inline constexpr double kStatEps = 1e-5;

// c x h x w activations stored as c x (h*w).
struct FeatureGrid {
  Matrix data;
  int height = 0;
  int width = 0;

  FeatureGrid() = default;
  FeatureGrid(Matrix d, int h, int w) : data(std::move(d)), height(h), width(w) { validate(); }

  int channels() const { return static_cast<int>(data.rows()); }
  void validate() const;
  ag::Var var() const { return ag::constant(data, height, width); }
  static FeatureGrid from_var(const ag::Var& v) { return {v.value(), v.height(), v.width()}; }
};

struct ChannelStats {
  Vector mu;
  Vector sigma;  // population std, >= kStatEps
};

ChannelStats channel_stats(const FeatureGrid& f);

// X + gamma * conv3x3(X); kernel starts at zero, gamma at 0.02.
struct Adapter {
  Conv2d conv;
  Param* gamma = nullptr;
  int channels = 0;

  Adapter() = default;
  Adapter(ParamStore& store, const std::string& name, int channels, Rng& rng);
  ag::Var operator()(const Ctx& ctx, const ag::Var& x) const;
};

FeatureGrid adapter_apply(const Adapter& adapter, const FeatureGrid& x);

// y = x * (sigma_t / sigma_s) + (mu_t - mu_s * sigma_t / sigma_s), where
// (mu_s, sigma_s) are the statistics of x. Reduces to x exactly when the
// target statistics are x's own.
ag::Var adain(const ag::Var& x, const ag::Var& mu_s, const ag::Var& sigma_s,
              const ag::Var& mu_t, const ag::Var& sigma_t);

struct Randomized {
  ag::Var pre;  // before the output adapter
  ag::Var out;
};

// Shoe content rendered with the input's statistics.
Randomized content_randomize(const Ctx& ctx, const ag::Var& f, const ag::Var& f_shoe,
                             const Adapter& prev, const Adapter& after);
// Input content with statistics interpolated towards the shoe's
// (alpha = 1 keeps the input's own statistics).
Randomized style_randomize(const Ctx& ctx, const ag::Var& f, const ag::Var& f_shoe,
                           const Adapter& prev, const Adapter& after, double alpha);

FeatureGrid content_randomize(const FeatureGrid& f, const FeatureGrid& f_shoe,
                              const Adapter& prev, const Adapter& after,
                              FeatureGrid* pre = nullptr);
FeatureGrid style_randomize(const FeatureGrid& f, const FeatureGrid& f_shoe,
                            const Adapter& prev, const Adapter& after, double alpha,
                            FeatureGrid* pre = nullptr);

// Random deformable-convolution block repeated a random number of times.
struct ProRandConvConfig {
  int max_repeats = 3;
  double weight_std_min = 0.1;
  double weight_std_max = 1.0;
  double offset_std = 0.5;  // pixels
  double gamma_min = 0.5;
  double gamma_max = 1.5;
  double beta_min = -0.5;
  double beta_max = 0.5;

  void validate() const;
};

struct ProRandConvParams {
  int repeats = 1;
  Matrix weight;   // 3 x 27, taps major
  Matrix offsets;  // 18 x (H*W): (dy, dx) per tap per pixel
  Vector gamma;
  Vector beta;
  int height = 0;
  int width = 0;
};

ProRandConvParams sample_prorandconv(std::uint64_t seed, int height, int width,
                                     const ProRandConvConfig& config = {});
// Image: 3 x (H*W) in [-1, 1].
Matrix apply_prorandconv(const Matrix& image, const ProRandConvParams& params);
Matrix pro_randconv(const Matrix& image, int height, int width, std::uint64_t seed,
                    const ProRandConvConfig& config = {});
// Per-channel standardization with the clamped population std.
Matrix instance_normalize(const Matrix& x);

// {image, two randomized copies}.
std::vector<Matrix> make_views(const Matrix& image, int height, int width, std::uint64_t seed,
                               const ProRandConvConfig& config = {});

}  // namespace footcontact
