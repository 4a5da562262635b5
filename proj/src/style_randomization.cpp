// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/style_randomization.hpp"

#include <cmath>

namespace footcontact {

using ag::Var;

void FeatureGrid::validate() const {
  if (data.rows() < 1 || height < 1 || width < 1) {
    throw InvalidArgument("feature grid dimensions must be positive");
  }
  if (data.cols() != static_cast<Eigen::Index>(height) * width) {
    throw InvalidArgument("feature grid data does not match h*w");
  }
  if (!data.allFinite()) throw InvalidArgument("feature grid has non-finite values");
}

ChannelStats channel_stats(const FeatureGrid& f) {
  const Var x = f.var();
  return {ag::row_mean(x).value(), ag::row_std(x, kStatEps).value()};
}

Adapter::Adapter(ParamStore& store, const std::string& name, int c, Rng& rng)
    : conv(store, name + ".conv", ParamGroup::kAdapters, c, c, 3, rng, false), channels(c) {
  conv.weight->value.setZero();
  gamma = &store.add(name + ".gamma", ParamGroup::kAdapters, init::constant(1, 1, 0.02));
}

Var Adapter::operator()(const Ctx& ctx, const Var& x) const {
  if (x.rows() != channels) {
    throw InvalidArgument("adapter expects " + std::to_string(channels) + " channels, got " +
                          std::to_string(x.rows()));
  }
  return ag::add(x, ag::mul_scalar(conv(ctx, x), ctx.p(*gamma)));
}

FeatureGrid adapter_apply(const Adapter& adapter, const FeatureGrid& x) {
  return FeatureGrid::from_var(adapter(Ctx{}, x.var()));
}

Var adain(const Var& x, const Var& mu_s, const Var& sigma_s, const Var& mu_t,
          const Var& sigma_t) {
  const Var ratio = ag::div(sigma_t, sigma_s);
  const Var shift = ag::sub(mu_t, ag::mul(mu_s, ratio));
  return ag::add_col(ag::mul_col(x, ratio), shift);
}

namespace {

void check_pair(const Var& f, const Var& fs) {
  if (f.rows() != fs.rows() || f.height() != fs.height() || f.width() != fs.width()) {
    throw InvalidArgument("input and shoe features must have the same shape");
  }
}

}  // namespace

Randomized content_randomize(const Ctx& ctx, const Var& f, const Var& f_shoe,
                             const Adapter& prev, const Adapter& after) {
  check_pair(f, f_shoe);
  const Var fp = prev(ctx, f);
  const Var fsp = prev(ctx, f_shoe);
  const Var pre = ag::as_grid(adain(fsp, ag::row_mean(fsp), ag::row_std(fsp, kStatEps),
                                    ag::row_mean(fp), ag::row_std(fp, kStatEps)),
                              f.height(), f.width());
  return {pre, after(ctx, pre)};
}

Randomized style_randomize(const Ctx& ctx, const Var& f, const Var& f_shoe,
                           const Adapter& prev, const Adapter& after, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw InvalidArgument("style interpolation weight must lie in [0, 1]");
  }
  check_pair(f, f_shoe);
  const Var fp = prev(ctx, f);
  const Var fsp = prev(ctx, f_shoe);
  const Var mu = ag::row_mean(fp);
  const Var sigma = ag::row_std(fp, kStatEps);
  const Var mu_hat = ag::add(ag::scale(mu, alpha), ag::scale(ag::row_mean(fsp), 1.0 - alpha));
  const Var sigma_hat =
      ag::add(ag::scale(sigma, alpha), ag::scale(ag::row_std(fsp, kStatEps), 1.0 - alpha));
  const Var pre = ag::as_grid(adain(fp, mu, sigma, mu_hat, sigma_hat), f.height(), f.width());
  return {pre, after(ctx, pre)};
}

FeatureGrid content_randomize(const FeatureGrid& f, const FeatureGrid& f_shoe,
                              const Adapter& prev, const Adapter& after, FeatureGrid* pre) {
  const Randomized r = content_randomize(Ctx{}, f.var(), f_shoe.var(), prev, after);
  if (pre) *pre = FeatureGrid::from_var(r.pre);
  return FeatureGrid::from_var(r.out);
}

FeatureGrid style_randomize(const FeatureGrid& f, const FeatureGrid& f_shoe,
                            const Adapter& prev, const Adapter& after, double alpha,
                            FeatureGrid* pre) {
  const Randomized r = style_randomize(Ctx{}, f.var(), f_shoe.var(), prev, after, alpha);
  if (pre) *pre = FeatureGrid::from_var(r.pre);
  return FeatureGrid::from_var(r.out);
}

void ProRandConvConfig::validate() const {
  if (max_repeats < 1) throw InvalidArgument("prorandconv max_repeats must be >= 1");
  if (!(weight_std_min > 0 && weight_std_max >= weight_std_min)) {
    throw InvalidArgument("prorandconv weight std range invalid");
  }
  if (offset_std < 0) throw InvalidArgument("prorandconv offset_std must be >= 0");
  if (gamma_max < gamma_min || beta_max < beta_min) {
    throw InvalidArgument("prorandconv affine range invalid");
  }
}

ProRandConvParams sample_prorandconv(std::uint64_t seed, int height, int width,
                                     const ProRandConvConfig& config) {
  config.validate();
  Rng rng(derive_seed(seed, 0x9c0));
  ProRandConvParams p;
  p.height = height;
  p.width = width;
  p.repeats = std::uniform_int_distribution<int>(1, config.max_repeats)(rng);
  const double std = std::exp(
      uniform(rng, std::log(config.weight_std_min), std::log(config.weight_std_max)));
  p.weight = init::normal(3, 27, std, rng);
  p.offsets = init::normal(18, static_cast<Eigen::Index>(height) * width, config.offset_std, rng);
  p.gamma.resize(3);
  p.beta.resize(3);
  for (int c = 0; c < 3; ++c) {
    p.gamma(c) = uniform(rng, config.gamma_min, config.gamma_max);
    p.beta(c) = uniform(rng, config.beta_min, config.beta_max);
  }
  return p;
}

Matrix instance_normalize(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.rows(); ++c) {
    const double mu = x.row(c).mean();
    const double var = (x.row(c).array() - mu).square().mean();
    const double sigma = std::max(std::sqrt(var), kStatEps);
    out.row(c) = (x.row(c).array() - mu) / sigma;
  }
  return out;
}

namespace {

// Deformable 3x3 convolution with bilinear sampling and zero padding.
Matrix deform_conv(const Matrix& x, const ProRandConvParams& p) {
  const int h = p.height;
  const int w = p.width;
  Matrix out = Matrix::Zero(3, x.cols());
  for (int y = 0; y < h; ++y) {
    for (int xx = 0; xx < w; ++xx) {
      const Eigen::Index pos = static_cast<Eigen::Index>(y) * w + xx;
      for (int tap = 0; tap < 9; ++tap) {
        const double sy = y + (tap / 3 - 1) + p.offsets(2 * tap, pos);
        const double sx = xx + (tap % 3 - 1) + p.offsets(2 * tap + 1, pos);
        const int y0 = static_cast<int>(std::floor(sy));
        const int x0 = static_cast<int>(std::floor(sx));
        const double wy = sy - y0;
        const double wx = sx - x0;
        double v[3] = {0, 0, 0};
        for (int dy = 0; dy < 2; ++dy) {
          const int yy = y0 + dy;
          if (yy < 0 || yy >= h) continue;
          for (int dx = 0; dx < 2; ++dx) {
            const int xs = x0 + dx;
            if (xs < 0 || xs >= w) continue;
            const double wgt = (dy ? wy : 1 - wy) * (dx ? wx : 1 - wx);
            const Eigen::Index q = static_cast<Eigen::Index>(yy) * w + xs;
            for (int c = 0; c < 3; ++c) v[c] += wgt * x(c, q);
          }
        }
        for (int o = 0; o < 3; ++o) {
          out(o, pos) += p.weight(o, 3 * tap) * v[0] + p.weight(o, 3 * tap + 1) * v[1] +
                         p.weight(o, 3 * tap + 2) * v[2];
        }
      }
    }
  }
  return out;
}

}  // namespace

Matrix apply_prorandconv(const Matrix& image, const ProRandConvParams& params) {
  if (image.rows() != 3 || image.cols() != static_cast<Eigen::Index>(params.height) * params.width) {
    throw InvalidArgument("prorandconv: image does not match the sampled geometry");
  }
  Matrix x = image;
  for (int r = 0; r < params.repeats; ++r) {
    Matrix y = instance_normalize(deform_conv(x, params));
    y = (y.array().colwise() * params.gamma.array()).colwise() + params.beta.array();
    x = y.array().tanh();
  }
  return x;
}

Matrix pro_randconv(const Matrix& image, int height, int width, std::uint64_t seed,
                    const ProRandConvConfig& config) {
  return apply_prorandconv(image, sample_prorandconv(seed, height, width, config));
}

std::vector<Matrix> make_views(const Matrix& image, int height, int width, std::uint64_t seed,
                               const ProRandConvConfig& config) {
  return {image, pro_randconv(image, height, width, derive_seed(seed, 1), config),
          pro_randconv(image, height, width, derive_seed(seed, 2), config)};
}

}  // namespace footcontact
