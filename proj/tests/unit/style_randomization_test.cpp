// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/style_randomization.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

namespace footcontact {
namespace {

FeatureGrid random_grid(int c, int h, int w, Rng& rng, double shift = 0, double scale = 1) {
  Matrix m = init::normal(c, h * w, scale, rng);
  m.array() += shift;
  return {m, h, w};
}

struct Adapters {
  ParamStore store;
  Adapter prev, after;
  explicit Adapters(int c, bool randomize = false) {
    Rng rng(5);
    prev = Adapter(store, "prev", c, rng);
    after = Adapter(store, "after", c, rng);
    if (randomize) {
      for (Adapter* a : {&prev, &after}) {
        a->conv.weight->value = init::normal(c, 9 * c, 0.2, rng);
        a->gamma->value(0, 0) = 0.7;
      }
    }
  }
};

TEST(ChannelStats, HandComputedCases) {
  const ChannelStats k = channel_stats(FeatureGrid(Matrix::Constant(2, 6, 5.0), 2, 3));
  EXPECT_EQ(k.mu(0), 5.0);
  EXPECT_EQ(k.sigma(1), kStatEps);
  Matrix m(1, 4);
  m << 1, 3, 1, 3;
  const ChannelStats s = channel_stats(FeatureGrid(m, 2, 2));
  EXPECT_DOUBLE_EQ(s.mu(0), 2.0);
  EXPECT_DOUBLE_EQ(s.sigma(0), 1.0);
}

TEST(ChannelStats, InvariantToSpatialPermutation) {
  Rng rng(1);
  const FeatureGrid f = random_grid(4, 5, 6, rng);
  std::vector<int> perm(30);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  Matrix p(4, 30);
  for (int i = 0; i < 30; ++i) p.col(i) = f.data.col(perm[i]);
  const ChannelStats a = channel_stats(f);
  const ChannelStats b = channel_stats(FeatureGrid(p, 5, 6));
  EXPECT_LT((a.mu - b.mu).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((a.sigma - b.sigma).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FeatureGridType, RejectsBadShapesAndNonFinite) {
  EXPECT_THROW(FeatureGrid(Matrix::Zero(2, 5), 2, 3), InvalidArgument);
  Matrix m = Matrix::Zero(2, 6);
  m(0, 0) = std::nan("");
  EXPECT_THROW(FeatureGrid(m, 2, 3), InvalidArgument);
}

TEST(AdapterOp, FreshAdapterIsExactIdentity) {
  Rng rng(2);
  Adapters a(6);
  for (int t = 0; t < 5; ++t) {
    const FeatureGrid x = random_grid(6, 4, 5, rng, 3.0, 10.0);
    EXPECT_EQ(adapter_apply(a.prev, x).data, x.data);
  }
}

TEST(AdapterOp, ZeroGammaAndIdentityKernel) {
  Rng rng(3);
  Adapters a(3, true);
  const FeatureGrid x = random_grid(3, 4, 4, rng);
  a.prev.gamma->value(0, 0) = 0.0;
  EXPECT_EQ(adapter_apply(a.prev, x).data, x.data);
  a.prev.conv.weight->value.setZero();
  for (int c = 0; c < 3; ++c) a.prev.conv.weight->value(c, 4 * 3 + c) = 1.0;
  a.prev.gamma->value(0, 0) = 0.5;
  EXPECT_LT((adapter_apply(a.prev, x).data - 1.5 * x.data).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(AdapterOp, ChannelMismatchRejected) {
  Rng rng(4);
  Adapters a(3);
  EXPECT_THROW(adapter_apply(a.prev, random_grid(4, 2, 2, rng)), InvalidArgument);
}

TEST(ContentRandomize, SelfTransferIsIdentity) {
  Rng rng(6);
  const FeatureGrid f = random_grid(5, 4, 4, rng, 1.0, 2.0);
  Adapters trained(5, true);
  FeatureGrid pre;
  content_randomize(f, f, trained.prev, trained.after, &pre);
  EXPECT_EQ(pre.data, adapter_apply(trained.prev, f).data);
  Adapters fresh(5);
  EXPECT_EQ(content_randomize(f, f, fresh.prev, fresh.after).data, f.data);
}

TEST(ContentRandomize, TransfersInputStatistics) {
  Rng rng(7);
  Adapters a(8, true);
  for (int t = 0; t < 10; ++t) {
    const FeatureGrid f = random_grid(8, 5, 5, rng, uniform(rng, -3, 3), uniform(rng, 0.5, 4));
    const FeatureGrid s = random_grid(8, 5, 5, rng, uniform(rng, -3, 3), uniform(rng, 0.5, 4));
    FeatureGrid pre;
    content_randomize(f, s, a.prev, a.after, &pre);
    const ChannelStats target = channel_stats(adapter_apply(a.prev, f));
    const ChannelStats got = channel_stats(pre);
    EXPECT_LT((got.mu - target.mu).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT((got.sigma - target.sigma).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(ContentRandomize, ShapeMismatchRejected) {
  Rng rng(8);
  Adapters a(3);
  EXPECT_THROW(content_randomize(random_grid(3, 2, 2, rng), random_grid(3, 2, 3, rng), a.prev, a.after),
               InvalidArgument);
}

TEST(StyleRandomize, AlphaOneKeepsOwnStatistics) {
  Rng rng(9);
  Adapters a(4, true);
  const FeatureGrid f = random_grid(4, 3, 3, rng, 2.0);
  const FeatureGrid s = random_grid(4, 3, 3, rng, -1.0, 3.0);
  FeatureGrid pre;
  const FeatureGrid out = style_randomize(f, s, a.prev, a.after, 1.0, &pre);
  const FeatureGrid fp = adapter_apply(a.prev, f);
  EXPECT_EQ(pre.data, fp.data);
  EXPECT_EQ(out.data, adapter_apply(a.after, fp).data);
  Adapters fresh(4);
  EXPECT_EQ(style_randomize(f, s, fresh.prev, fresh.after, 1.0).data, f.data);
}

TEST(StyleRandomize, AlphaZeroAdoptsShoeStatistics) {
  Rng rng(10);
  Adapters a(6, true);
  for (int t = 0; t < 10; ++t) {
    const FeatureGrid f = random_grid(6, 4, 5, rng, uniform(rng, -2, 2), uniform(rng, 0.5, 3));
    const FeatureGrid s = random_grid(6, 4, 5, rng, uniform(rng, -2, 2), uniform(rng, 0.5, 3));
    const double alpha = t == 0 ? 0.0 : uniform(rng, 0, 1);
    FeatureGrid pre;
    style_randomize(f, s, a.prev, a.after, alpha, &pre);
    const ChannelStats own = channel_stats(adapter_apply(a.prev, f));
    const ChannelStats shoe = channel_stats(adapter_apply(a.prev, s));
    const Vector mu_hat = alpha * own.mu + (1 - alpha) * shoe.mu;
    const Vector sigma_hat = alpha * own.sigma + (1 - alpha) * shoe.sigma;
    const ChannelStats got = channel_stats(pre);
    EXPECT_LT((got.mu - mu_hat).cwiseAbs().maxCoeff(), 1e-4);
    EXPECT_LT((got.sigma - sigma_hat).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(StyleRandomize, ContinuousInAlpha) {
  Rng rng(11);
  Adapters a(3, true);
  const FeatureGrid f = random_grid(3, 4, 4, rng, 1.0, 2.0);
  const FeatureGrid s = random_grid(3, 4, 4, rng, -1.0, 0.5);
  const ChannelStats own = channel_stats(adapter_apply(a.prev, f));
  const ChannelStats shoe = channel_stats(adapter_apply(a.prev, s));
  const FeatureGrid fp = adapter_apply(a.prev, f);
  // d pre / d alpha = normalized(F') (sigma' - sigma_s') + (mu' - mu_s').
  Matrix analytic(3, 16);
  for (int c = 0; c < 3; ++c) {
    analytic.row(c) = ((fp.data.row(c).array() - own.mu(c)) / own.sigma(c)) *
                          (own.sigma(c) - shoe.sigma(c)) +
                      (own.mu(c) - shoe.mu(c));
  }
  for (double alpha : {0.2, 0.5, 0.8}) {
    const double h = 1e-6;
    FeatureGrid up, down;
    style_randomize(f, s, a.prev, a.after, alpha + h, &up);
    style_randomize(f, s, a.prev, a.after, alpha - h, &down);
    const Matrix numeric = (up.data - down.data) / (2 * h);
    EXPECT_LT((numeric - analytic).cwiseAbs().maxCoeff(), 1e-4);
  }
}

TEST(StyleRandomize, AlphaOutsideUnitIntervalRejected) {
  Rng rng(12);
  Adapters a(2);
  const FeatureGrid f = random_grid(2, 2, 2, rng);
  EXPECT_THROW(style_randomize(f, f, a.prev, a.after, -0.1), InvalidArgument);
  EXPECT_THROW(style_randomize(f, f, a.prev, a.after, 1.5), InvalidArgument);
}

Matrix test_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Matrix img(3, h * w);
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < h * w; ++i)
      img(c, i) = std::clamp(std::sin(0.3 * i + c) * 0.6 + gaussian(rng, 0, 0.2), -1.0, 1.0);
  return img;
}

TEST(ProRandConv, OpenRangeAndDeterminism) {
  const Matrix img = test_image(24, 24, 1);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Matrix out = pro_randconv(img, 24, 24, seed);
    ASSERT_LT(out.cwiseAbs().maxCoeff(), 1.0) << seed;
    if (seed < 5) EXPECT_EQ(out, pro_randconv(img, 24, 24, seed));
  }
}

TEST(ProRandConv, DegenerateConfigurationIsTanhOfInstanceNorm) {
  const Matrix img = test_image(10, 12, 2);
  ProRandConvParams p = sample_prorandconv(0, 10, 12);
  p.repeats = 1;
  p.offsets.setZero();
  p.weight.setZero();
  for (int c = 0; c < 3; ++c) p.weight(c, 4 * 3 + c) = 1.0;
  p.gamma.setOnes();
  p.beta.setZero();
  const Matrix expect = instance_normalize(img).array().tanh();
  EXPECT_LT((apply_prorandconv(img, p) - expect).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ProRandConv, RepeatsAndRangesFollowConfig) {
  ProRandConvConfig cfg;
  std::set<int> repeats;
  for (std::uint64_t s = 0; s < 60; ++s) {
    const ProRandConvParams p = sample_prorandconv(s, 4, 4, cfg);
    repeats.insert(p.repeats);
    EXPECT_GE(p.gamma.minCoeff(), 0.5);
    EXPECT_LE(p.gamma.maxCoeff(), 1.5);
    EXPECT_GE(p.beta.minCoeff(), -0.5);
    EXPECT_LE(p.beta.maxCoeff(), 0.5);
  }
  EXPECT_EQ(repeats, (std::set<int>{1, 2, 3}));
  cfg.max_repeats = 0;
  EXPECT_THROW(sample_prorandconv(0, 4, 4, cfg), InvalidArgument);
}

TEST(MakeViews, CleanViewFirstAndRandomViewsDiffer) {
  const Matrix img = test_image(16, 16, 3);
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto views = make_views(img, 16, 16, seed);
    ASSERT_EQ(views.size(), 3u);
    ASSERT_EQ(views[0], img);
    for (const auto& v : views) ASSERT_EQ(v.rows(), 3);
    differing += views[1] != views[2];
  }
  EXPECT_EQ(differing, 100);
}

}  // namespace
}  // namespace footcontact
