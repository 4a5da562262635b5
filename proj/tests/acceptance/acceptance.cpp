// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "footcontact/evalcli.hpp"

namespace footcontact {
namespace {

namespace fs = std::filesystem;

struct Outcome {
  std::vector<std::string> failures;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
  void note(const std::string& n) { notes.push_back(n); }
};

std::string fmt(double v) {
  std::ostringstream s;
  s.precision(6);
  s << v;
  return s.str();
}

// ---------------------------------------------------------------- 1

Points points_on(const GroundPlane& p, int n, double noise, Rng& rng) {
  Points pts(n, 3);
  for (int i = 0; i < n; ++i) {
    const double g1 = uniform(rng, -2, 2), g2 = uniform(rng, -2, 2);
    pts(i, p.axes.ground_axis1) = g1;
    pts(i, p.axes.ground_axis2) = g2;
    pts(i, p.axes.height_axis) = p.a * g1 + p.b * g2 + p.c + (noise > 0 ? gaussian(rng, 0, noise) : 0);
  }
  return pts;
}

double coeff_err(const GroundPlane& a, const GroundPlane& b) {
  return std::max({std::abs(a.a - b.a), std::abs(a.b - b.b), std::abs(a.c - b.c)});
}

void plane_recovery(Outcome& o) {
  const GroundPlane prox{0.005543, 0.021068, -0.116057, AxisConvention::z_up(), 0};
  Rng rng(101);
  const double clean = coeff_err(fit_plane_least_squares(points_on(prox, 200, 0, rng), prox.axes), prox);
  const double noisy = coeff_err(fit_plane_least_squares(points_on(prox, 200, 1e-3, rng), prox.axes), prox);
  o.expect(clean <= 1e-9, "noiseless PROX error " + fmt(clean));
  o.expect(noisy <= 1e-3, "1 mm noise PROX error " + fmt(noisy));

  const int n_in = 700, n_out = 300;
  Points pts(n_in + n_out, 3);
  pts.topRows(n_in) = points_on(prox, n_in, 0, rng);
  for (int i = 0; i < n_out; ++i) {
    pts.row(n_in + i) << uniform(rng, -2, 2), uniform(rng, -2, 2), uniform(rng, -1.5, 1.5);
  }
  RansacParams params;
  params.percentile_p = 100;
  params.seed = 5;
  const double ransac = coeff_err(fit_plane_ransac(pts, params, prox.axes), prox);
  o.expect(ransac <= 5e-3, "RANSAC with 30% outliers error " + fmt(ransac));
  o.note("ls " + fmt(clean) + ", noisy " + fmt(noisy) + ", ransac " + fmt(ransac));
}

// ---------------------------------------------------------------- 2

// Implicit-form distance, positive on the physical up side.
double brute_distance(const GroundPlane& p, const Eigen::Vector3d& x) {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n(p.axes.height_axis) = 1;
  n(p.axes.ground_axis1) = -p.a;
  n(p.axes.ground_axis2) = -p.b;
  const double d = (n.dot(x) - p.c) / n.norm();
  return p.axes.negative_height ? -d : d;
}

void labeler_oracle(Outcome& o) {
  const double presets[] = {tolerance::kMoyo, tolerance::kMotionPro, tolerance::kProx,
                            tolerance::kBehave};
  const FootMesh mesh = build_canonical_foot_mesh(0);
  Rng rng(202);
  long mismatches = 0, positives = 0;
  for (int t = 0; t < 100; ++t) {
    GroundPlane p{uniform(rng, -0.2, 0.2), uniform(rng, -0.2, 0.2), uniform(rng, -0.5, 0.5),
                  t % 2 ? AxisConvention::z_up() : AxisConvention::y_up(), 0};
    p.axes.negative_height = t % 3 == 0;
    const double tol = t < 4 ? presets[t] : uniform(rng, 0.001, 0.08);
    // Foot placed near the plane with a random yaw and hover.
    const double yaw = uniform(rng, 0, 6.283185307179586);
    const int g1 = p.axes.ground_axis1, g2 = p.axes.ground_axis2, h = p.axes.height_axis;
    Points v(mesh.vertex_count(), 3);
    const double cx = uniform(rng, -0.5, 0.5), cz = uniform(rng, -0.5, 0.5);
    const double hover = uniform(rng, -0.02, 0.06);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const double x = mesh.vertices(i, 0), y = mesh.vertices(i, 1), z = mesh.vertices(i, 2);
      const double a1 = cx + std::cos(yaw) * x - std::sin(yaw) * z;
      const double a2 = cz + std::sin(yaw) * x + std::cos(yaw) * z;
      v(i, g1) = a1;
      v(i, g2) = a2;
      v(i, h) = p.a * a1 + p.b * a2 + p.c + p.axes.up_sign() * (y + hover);
    }
    const std::vector<int> labels = label_contacts(v, p, tol);
    for (int i = 0; i < mesh.vertex_count(); ++i) {
      const int expect = std::abs(brute_distance(p, v.row(i).transpose())) <= tol ? 1 : 0;
      mismatches += labels[i] != expect;
      positives += expect;
    }
  }
  o.expect(mismatches == 0, std::to_string(mismatches) + " label mismatches");
  o.expect(positives > 0, "fixtures produced no contacts");
  o.note(std::to_string(positives) + " contact vertices over 100 triples");
}

// ---------------------------------------------------------------- 3

FeatureGrid random_grid(int c, int h, int w, Rng& rng, double shift, double scale) {
  Matrix m(c, h * w);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = shift + scale * gaussian(rng, 0, 1);
  return {m, h, w};
}

void randomization_identities(Outcome& o) {
  Rng rng(303);
  const int c = 64;
  ParamStore fresh_store;
  const Adapter fresh_prev(fresh_store, "p", c, rng), fresh_after(fresh_store, "a", c, rng);
  ParamStore store;
  Adapter prev(store, "p", c, rng), after(store, "a", c, rng);
  for (Adapter* a : {&prev, &after}) {
    a->conv.weight->value = init::normal(c, 9 * c, 0.05, rng);
    a->gamma->value(0, 0) = 0.6;
  }

  double worst_stats = 0;
  bool identity = true, alpha_one = true;
  for (int t = 0; t < 10; ++t) {
    const FeatureGrid f = random_grid(c, 8, 8, rng, uniform(rng, -2, 2), uniform(rng, 0.5, 3));
    const FeatureGrid s = random_grid(c, 8, 8, rng, uniform(rng, -2, 2), uniform(rng, 0.5, 3));
    identity = identity && adapter_apply(fresh_prev, f).data == f.data &&
               adapter_apply(fresh_after, s).data == s.data &&
               style_randomize(f, s, fresh_prev, fresh_after, 1.0).data == f.data;

    // Content randomization carries the input's statistics onto shoe content.
    FeatureGrid pre;
    content_randomize(f, s, prev, after, &pre);
    const ChannelStats want = channel_stats(adapter_apply(prev, f));
    const ChannelStats got = channel_stats(pre);
    worst_stats = std::max({worst_stats, (got.mu - want.mu).cwiseAbs().maxCoeff(),
                            (got.sigma - want.sigma).cwiseAbs().maxCoeff()});
    // alpha = 0 adopts the shoe statistics.
    style_randomize(f, s, prev, after, 0.0, &pre);
    const ChannelStats shoe = channel_stats(adapter_apply(prev, s));
    const ChannelStats got0 = channel_stats(pre);
    worst_stats = std::max({worst_stats, (got0.mu - shoe.mu).cwiseAbs().maxCoeff(),
                            (got0.sigma - shoe.sigma).cwiseAbs().maxCoeff()});

    alpha_one = alpha_one && style_randomize(f, s, prev, after, 1.0).data ==
                                 adapter_apply(after, adapter_apply(prev, f)).data;
  }
  o.expect(identity, "fresh adapter is not an exact identity");
  o.expect(worst_stats <= 1e-4, "AdaIN statistics error " + fmt(worst_stats));
  o.expect(alpha_one, "alpha = 1 differs from the adapter-only path");

  Matrix img(3, 48 * 48);
  for (Eigen::Index i = 0; i < img.size(); ++i) img.data()[i] = uniform(rng, -1, 1);
  double max_abs = 0;
  bool deterministic = true;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const Matrix a = pro_randconv(img, 48, 48, seed);
    max_abs = std::max(max_abs, a.cwiseAbs().maxCoeff());
    if (seed < 5) deterministic = deterministic && a == pro_randconv(img, 48, 48, seed);
  }
  o.expect(max_abs < 1.0, "pro_randconv reached " + fmt(max_abs));
  o.expect(deterministic, "pro_randconv not deterministic per seed");
  o.note("stats err " + fmt(worst_stats) + ", randconv max |x| " + fmt(max_abs));
}

// ---------------------------------------------------------------- 4

std::uint32_t nonzero_groups(const ParamStore& store) {
  std::uint32_t bits = 0;
  for (const auto& p : store.params()) {
    if (p->grad.cwiseAbs().maxCoeff() > 0.0) bits |= group_bit(p->group);
  }
  return bits;
}

std::vector<SceneSample> desk_scenes(int n, std::uint64_t seed) {
  SceneConfig sc;
  sc.resolution = ModelConfig::desk().encoder.resolution;
  std::vector<SceneSample> out;
  for (int i = 0; i < n; ++i) out.push_back(generate_scene(derive_seed(seed, static_cast<std::uint64_t>(i)), sc));
  return out;
}

void gradient_routing(Outcome& o) {
  FootContactModel model(ModelConfig::desk());
  const SceneSample scene = desk_scenes(1, 404)[0];
  const Targets targets = Targets::from_sample(scene);
  const Image shoe = sample_shoe_image(ShoeStyleSource::procedural(), 9, model.resolution());
  const Matrix view = to_network_input(scene.image);
  const RoutingContract contract = RoutingContract::standard();

  Ctx ctx;
  const ag::Var fs = shoe_feature(model, ctx, shoe);
  const LossTerms t = compute_losses(forward_view(model, ctx, view, fs, {0.4}), targets);
  const std::pair<LossTerm, ag::Var> cases[] = {
      {LossTerm::kMain, t.main},       {LossTerm::kStyle, t.style},
      {LossTerm::kStyleAdv, t.style_adv}, {LossTerm::kMask, t.mask},
      {LossTerm::kGround, ag::add(t.pixel_height, t.ground_normal)}};
  for (const auto& [term, var] : cases) {
    model.params().zero_grad();
    ag::backward(var);
    const std::uint32_t got = nonzero_groups(model.params());
    const std::uint32_t want = contract.support[static_cast<int>(term)];
    o.expect(got == want, std::string(loss_term_name(term)) + " support " + std::to_string(got) +
                              " != contract " + std::to_string(want));
  }

  // Finite differences of the full per-sample loss with every detach off.
  Ctx plain;
  plain.routing = false;
  const TrainConfig cfg;
  const std::vector<Matrix> views{view};
  model.params().zero_grad();
  sample_loss(model, plain, targets, views, shoe, 0.4, cfg, 1.0);
  Rng pick(405);
  const auto& params = model.params().params();
  double worst = 0;
  for (int k = 0; k < 20; ++k) {
    Param& p = *params[std::uniform_int_distribution<std::size_t>(0, params.size() - 1)(pick)];
    const Eigen::Index i = std::uniform_int_distribution<Eigen::Index>(0, p.value.size() - 1)(pick);
    const double analytic = p.grad.data()[i];
    const double orig = p.value.data()[i];
    const double h = 1e-5;
    p.value.data()[i] = orig + h;
    const double up = sample_loss(model, plain, targets, views, shoe, 0.4, cfg, 0.0).losses.total;
    p.value.data()[i] = orig - h;
    const double down = sample_loss(model, plain, targets, views, shoe, 0.4, cfg, 0.0).losses.total;
    p.value.data()[i] = orig;
    const double numeric = (up - down) / (2 * h);
    const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-6});
    if (rel >= 1e-3) o.failures.push_back(p.name + " rel err " + fmt(rel));
    worst = std::max(worst, rel);
  }
  o.note("worst FD rel err " + fmt(worst) + " over 20 parameters");
}

// ---------------------------------------------------------------- 5

void structural(Outcome& o) {
  FootContactModel model(ModelConfig::desk());
  const SceneSample scene = desk_scenes(1, 505)[0];
  Ctx ctx;
  const EncoderOutput enc = model.encoder(ctx, to_network_input(scene.image));
  const int g = model.config().encoder.grid();
  const Matrix mask_logits = model.mask_decoder(ctx, enc, model.resolution(), model.resolution()).value();
  Matrix grid_mask = mask_to_grid(binarize_mask(mask_logits), model.resolution(), model.resolution(), g, g);
  // Force a mixed mask so both regions exist.
  for (Eigen::Index i = 0; i < grid_mask.size(); ++i) grid_mask(0, i) = (i % 3 == 0) ? 1.0 : 0.0;
  const BranchOutput out = model.run_branch(ctx, model.main, enc.feature, grid_mask);

  const double sum_err = ((out.attention.w_g + out.attention.w_r).array() - 1.0).abs().maxCoeff();
  o.expect(sum_err <= 1e-6, "attention weights off by " + fmt(sum_err));

  const Matrix n = out.normal.normal.value();
  o.expect(std::abs(n.norm() - 1.0) <= 1e-5, "normal length " + fmt(n.norm()));
  Rng rng(506);
  Matrix f4 = out.ground[3].value();
  for (Eigen::Index i = 0; i < f4.cols(); ++i) {
    if (grid_mask(0, i) > 0) {
      for (Eigen::Index ch = 0; ch < f4.rows(); ++ch) f4(ch, i) += gaussian(rng, 0, 5);
    }
  }
  const Matrix n2 = model.normal(ctx, ag::constant(f4, g, g), grid_mask).normal.value();
  const double base_diff =
      (model.normal(ctx, out.ground[3], grid_mask).normal.value() - n).cwiseAbs().maxCoeff();
  o.expect(base_diff == 0.0, "normal decoder not reproducible");
  o.expect((n2 - n).cwiseAbs().maxCoeff() <= 1e-12, "normal moved under foot-region perturbation");

  const Vector z = out.logits.value().transpose();
  const auto probs = multi_level_probs(z, model.regressors());
  double worst = 0;
  const FootMesh& mesh = model.mesh();
  for (int j = 0; j < kNumFootParts; ++j) {
    double sum = 0;
    int cnt = 0;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (mesh.part_labels[v] == j) {
        sum += z(v);
        ++cnt;
      }
    }
    worst = std::max(worst, std::abs(probs[1](j) - 1.0 / (1.0 + std::exp(-sum / cnt))));
  }
  for (int k = 0; k < kNumKeypoints; ++k) {
    worst = std::max(worst, std::abs(probs[2](k) - probs[1](static_cast<int>(kKeypointParts[k]))));
  }
  o.expect(worst <= 1e-9, "part-mean oracle error " + fmt(worst));

  // Sigmoid must follow projection: the swapped order gives different joints.
  Rng zr(507);
  Vector spread(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) spread(v) = uniform(zr, -4, 4);
  const auto ordered = multi_level_probs(spread, model.regressors());
  const Vector s = (1.0 / (1.0 + (-spread.array()).exp())).matrix();
  const Vector swapped = model.regressors()[1].weights * s;
  o.expect((ordered[1] - swapped).cwiseAbs().maxCoeff() > 1e-3, "projection order not observable");
  o.note("attention " + fmt(sum_err) + ", |n|-1 " + fmt(std::abs(n.norm() - 1)) + ", oracle " + fmt(worst));
}

// ---------------------------------------------------------------- 6

void metric_oracle(Outcome& o) {
  Rng rng(606);
  std::vector<Vector> probs;
  std::vector<std::vector<int>> gt;
  double sp = 0, sr = 0, sf = 0;
  long n = 0, skipped = 0;
  for (int s = 0; s < 1000; ++s) {
    const int v = 1 + static_cast<int>(rng() % 265);
    const double density = uniform(rng, 0, 0.5);
    Vector p(v);
    std::vector<int> g(v);
    long tp = 0, fp = 0, fn = 0;
    for (int i = 0; i < v; ++i) {
      p(i) = uniform(rng, 0, 1);
      g[i] = uniform(rng, 0, 1) < density;
      const bool pred = p(i) > 0.5;
      tp += pred && g[i];
      fp += pred && !g[i];
      fn += !pred && g[i];
    }
    probs.push_back(p);
    gt.push_back(g);
    if (tp + fn == 0) {
      ++skipped;
      continue;
    }
    const double pr = tp + fp ? double(tp) / double(tp + fp) : 0.0;
    const double rc = double(tp) / double(tp + fn);
    const double f1 = pr + rc > 0 ? 2 * pr * rc / (pr + rc) : 0.0;
    const auto m = sample_metrics(p, g);
    if (!m || m->precision != pr || m->recall != rc || m->f1 != f1) {
      o.failures.push_back("fixture " + std::to_string(s) + " differs from oracle");
    }
    sp += pr;
    sr += rc;
    sf += f1;
    ++n;
  }
  const MetricReport r = evaluate(probs, gt);
  o.expect(r.n_evaluated == n && r.n_skipped == skipped, "evaluated/skipped counts differ");
  o.expect(skipped > 0, "no zero-positive fixture was generated");
  o.expect(r.precision == sp / double(n) && r.recall == sr / double(n) && r.f1 == sf / double(n),
           "dataset means differ from oracle");

  auto v3 = [](double a, double b, double c) { return (Vector(3) << a, b, c).finished(); };
  const MetricReport toe = evaluate_joint3({v3(0.9, 0.1, 0.1), v3(0.1, 0.9, 0.1)}, {{1, 0, 0}, {0, 1, 0}});
  o.expect(toe.f1 == 1.0, "OR toe aggregation");
  const MetricReport mixed = evaluate_joint3({v3(0.2, 0.7, 0.6), v3(0.1, 0.3, 0.9), v3(0.8, 0.8, 0.1)},
                                             {{0, 1, 0}, {1, 1, 1}, {0, 0, 0}});
  o.expect(mixed.n_skipped == 1 && mixed.precision == 0.75 && mixed.recall == 0.75 &&
               std::abs(mixed.f1 - 2.0 / 3.0) < 1e-15,
           "hand-enumerated joint fixture");
  o.note(std::to_string(n) + " evaluated, " + std::to_string(skipped) + " skipped");
}

// ---------------------------------------------------------------- 7

void overfit(Outcome& o) {
  const std::vector<SceneSample> data = desk_scenes(32, 707);
  TrainConfig cfg;  // lr 1e-5, batch 4, 200 steps
  cfg.seed = 7;

  // Determinism probe on a short twin run.
  {
    FootContactModel a(ModelConfig::desk()), b(ModelConfig::desk());
    Trainer ta(a, data, cfg), tb(b, data, cfg);
    o.expect(ta.step().losses.total == tb.step().losses.total, "seeded twin steps differ");
  }

  FootContactModel model(ModelConfig::desk());
  Trainer trainer(model, data, cfg);
  const auto log = trainer.run();
  o.expect(static_cast<long>(log.size()) == 200, "ran " + std::to_string(log.size()) + " steps");

  std::vector<Vector> probs;
  std::vector<std::vector<int>> gt;
  double inter = 0, uni = 0, abs_err = 0, cos = 0;
  long valid = 0;
  for (const SceneSample& s : data) {
    const Inference inf = model.predict(s.image);
    probs.push_back(inf.probs[0]);
    gt.push_back(s.vertex_contact);
    for (Eigen::Index i = 0; i < inf.mask_prob.cols(); ++i) {
      const bool p = inf.mask_prob(0, i) > 0.5, g = s.foot_mask[i] != 0;
      inter += p && g;
      uni += p || g;
      if (s.height_valid[i]) {
        abs_err += std::abs(inf.pixel_height(0, i) - s.pixel_height[i]);
        ++valid;
      }
    }
    cos += inf.normal.dot(s.ground_normal.normalized());
  }
  const double f1 = evaluate(probs, gt).f1;
  const double iou = uni > 0 ? inter / uni : 0;
  const double mae = abs_err / static_cast<double>(std::max(valid, 1L));
  cos /= static_cast<double>(data.size());
  o.expect(f1 >= 0.90, "vertex F1 " + fmt(f1) + " < 0.90");
  o.expect(iou >= 0.80, "mask IoU " + fmt(iou) + " < 0.80");
  o.expect(mae <= 5.0, "pixel-height MAE " + fmt(mae) + " px > 5");
  o.expect(cos >= 0.95, "normal cosine " + fmt(cos) + " < 0.95");
  o.note("F1 " + fmt(f1) + ", IoU " + fmt(iou) + ", MAE " + fmt(mae) + " px, cos " + fmt(cos) +
         ", final loss " + fmt(log.back().losses.total));
}

// ---------------------------------------------------------------- 8

void schedule(Outcome& o) {
  o.expect(lr_schedule(0) == 1e-5, "epoch 0 " + fmt(lr_schedule(0)));
  o.expect(lr_schedule(5) == 9e-6, "epoch 5 " + fmt(lr_schedule(5)));
  o.expect(lr_schedule(10) == 8.1e-6, "epoch 10 " + fmt(lr_schedule(10)));
}

// ---------------------------------------------------------------- 9

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void spit(const fs::path& p, const std::string& s) { std::ofstream(p, std::ios::binary) << s; }

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

void persistence(Outcome& o) {
  const fs::path dir = fs::temp_directory_path() / "footcontact_acceptance_ckpt";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::vector<SceneSample> data = desk_scenes(4, 909);
  TrainConfig cfg;
  cfg.batch_size = 2;
  cfg.seed = 9;

  FootContactModel a(ModelConfig::desk());
  Trainer ta(a, data, cfg);
  ta.step();
  ta.save(dir / "ckpt.bin");
  const StepRecord ra = ta.step();

  FootContactModel b(ModelConfig::desk());
  Trainer tb(b, data, cfg);
  tb.load(dir / "ckpt.bin");
  const StepRecord rb = tb.step();
  bool same = ra.losses.total == rb.losses.total && ta.global_step() == tb.global_step();
  for (std::size_t i = 0; i < a.params().params().size(); ++i) {
    same = same && a.params().params()[i]->value == b.params().params()[i]->value;
  }
  o.expect(same, "resumed step is not bit-exact");

  const std::string good = slurp(dir / "ckpt.bin");
  std::string bad = good;
  bad[0] = 'X';
  spit(dir / "magic.bin", bad);
  o.expect(error_of([&] { load_checkpoint(dir / "magic.bin"); }).find("bad magic") != std::string::npos,
           "bad magic not named");
  bad = good;
  bad[8] = 7;
  spit(dir / "version.bin", bad);
  o.expect(error_of([&] { load_checkpoint(dir / "version.bin"); }).find("version 7") != std::string::npos,
           "unsupported version not named");
  spit(dir / "short.bin", good.substr(0, good.size() - 64));
  o.expect(error_of([&] { load_checkpoint(dir / "short.bin"); }).find("truncated blob") != std::string::npos,
           "truncation not named");
  bad = good;
  const auto brace = bad.find('{');
  bad[brace] = '[';
  spit(dir / "header.bin", bad);
  o.expect(!error_of([&] { load_checkpoint(dir / "header.bin"); }).empty(), "corrupt header accepted");
  fs::remove_all(dir);
}

// ----------------------------------------------------------------

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  void (*run)(Outcome&);
};

}  // namespace
}  // namespace footcontact

int main() {
  using namespace footcontact;
  const Criterion criteria[] = {
      {1, "plane-fit recovery", 1.0, plane_recovery},
      {2, "contact-labeler oracle", 1.0, labeler_oracle},
      {3, "randomization identities", 10.0, randomization_identities},
      {4, "gradient routing", 120.0, gradient_routing},
      {5, "structural invariants", 30.0, structural},
      {6, "metric oracle", 5.0, metric_oracle},
      {7, "end-to-end overfit", 300.0, overfit},
      {8, "schedule fixture", 1.0, schedule},
      {9, "persistence", 60.0, persistence},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > c.budget_s) o.failures.push_back("took " + fmt(secs) + " s, budget " + fmt(c.budget_s) + " s");
    const bool ok = o.failures.empty();
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << c.id << ": " << c.name << " ("
              << fmt(secs) << " s)";
    for (const auto& n : o.notes) std::cout << " | " << n;
    for (const auto& f : o.failures) std::cout << " | " << f;
    std::cout << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
