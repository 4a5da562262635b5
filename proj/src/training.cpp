// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/training.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

namespace footcontact {

using ag::Var;

LossBundle& LossBundle::operator+=(const LossBundle& o) {
  main += o.main;
  style += o.style;
  style_adv += o.style_adv;
  mask += o.mask;
  pixel_height += o.pixel_height;
  ground_normal += o.ground_normal;
  total += o.total;
  return *this;
}

LossBundle LossBundle::scaled(double s) const {
  LossBundle b = *this;
  b.main *= s;
  b.style *= s;
  b.style_adv *= s;
  b.mask *= s;
  b.pixel_height *= s;
  b.ground_normal *= s;
  b.total *= s;
  return b;
}

namespace {

Matrix row_of(const std::vector<int>& v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

template <typename T>
Matrix row_of_bytes(const std::vector<T>& v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, static_cast<Eigen::Index>(i)) = static_cast<double>(v[i]);
  return m;
}

template <typename T>
const T& need(const std::optional<T>& x, const char* name) {
  if (!x) throw InvalidArgument(std::string("missing target channel: ") + name);
  return *x;
}

void check_cols(const Var& pred, const Matrix& target, const char* name) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw InvalidArgument(std::string("target channel ") + name + " has shape " +
                          std::to_string(target.rows()) + "x" + std::to_string(target.cols()) +
                          ", prediction is " + std::to_string(pred.rows()) + "x" +
                          std::to_string(pred.cols()));
  }
}

Var multi_level_bce(const std::vector<Var>& levels, const std::array<const Matrix*, 3>& gt) {
  if (levels.size() != 3) throw InvalidArgument("expected predictions at 3 levels");
  static constexpr const char* kNames[3] = {"vertex", "joint11", "joint3"};
  Var sum;
  for (int i = 0; i < 3; ++i) {
    check_cols(levels[i], *gt[i], kNames[i]);
    const Var l = ag::bce_with_logits(levels[i], *gt[i]);
    sum = sum ? ag::add(sum, l) : l;
  }
  return ag::scale(sum, 1.0 / 3.0);
}

Var cosine_loss(const Var& pred, const Eigen::Vector3d& gt) {
  if (pred.rows() != 3 || pred.cols() != 1) throw InvalidArgument("normal prediction must be 3 x 1");
  const Matrix g = gt.normalized();
  return ag::add_scalar(ag::scale(ag::dot_const(pred, g), -1.0), 1.0);
}

Var half_sum(const Var& a, const Var& b) { return ag::scale(ag::add(a, b), 0.5); }

void check_finite(const LossBundle& b) {
  const std::pair<const char*, double> terms[] = {
      {"main", b.main},         {"style", b.style},
      {"style_adv", b.style_adv}, {"mask", b.mask},
      {"pixel_height", b.pixel_height}, {"ground_normal", b.ground_normal},
      {"total", b.total}};
  for (const auto& [name, v] : terms) {
    if (!std::isfinite(v)) throw NonFiniteLoss(name);
  }
}

}  // namespace

Targets Targets::from_sample(const SceneSample& s) {
  Targets t;
  t.vertex = row_of(s.vertex_contact);
  t.joint11 = row_of(s.joint11);
  t.joint3 = row_of(s.joint3);
  t.mask = row_of_bytes(s.foot_mask);
  Matrix h = row_of_bytes(s.pixel_height);
  Matrix valid = row_of_bytes(s.height_valid);
  for (Eigen::Index i = 0; i < h.cols(); ++i) {
    if (!std::isfinite(h(0, i))) {
      h(0, i) = 0.0;
      valid(0, i) = 0.0;
    }
  }
  t.height = std::move(h);
  t.height_valid = std::move(valid);
  t.normal = s.ground_normal;
  return t;
}

LossBundle LossTerms::values() const {
  LossBundle b;
  b.main = main.item();
  b.style = style.item();
  b.style_adv = style_adv.item();
  b.mask = mask.item();
  b.pixel_height = pixel_height.item();
  b.ground_normal = ground_normal.item();
  b.total = total.item();
  return b;
}

LossTerms compute_losses(const Predictions& preds, const Targets& targets,
                         const LossWeights& weights) {
  const std::array<const Matrix*, 3> gt{&need(targets.vertex, "vertex"),
                                        &need(targets.joint11, "joint11"),
                                        &need(targets.joint3, "joint3")};
  const Matrix& mask = need(targets.mask, "mask");
  const Matrix& height = need(targets.height, "height");
  const Matrix& valid = need(targets.height_valid, "height_valid");
  const Eigen::Vector3d& normal = need(targets.normal, "normal");

  LossTerms t;
  t.main = multi_level_bce(preds.main.level_logits, gt);
  t.style = multi_level_bce(preds.style.level_logits, gt);

  const std::array<Matrix, 3> uniform{Matrix::Constant(gt[0]->rows(), gt[0]->cols(), 0.5),
                                      Matrix::Constant(gt[1]->rows(), gt[1]->cols(), 0.5),
                                      Matrix::Constant(gt[2]->rows(), gt[2]->cols(), 0.5)};
  t.style_adv = multi_level_bce(preds.adversarial_logits, {&uniform[0], &uniform[1], &uniform[2]});

  check_cols(preds.mask_logits, mask, "mask");
  t.mask = ag::scale(ag::add(ag::bce_with_logits(preds.mask_logits, mask),
                             ag::dice_loss_with_logits(preds.mask_logits, mask)),
                     0.5);

  check_cols(preds.main.pixel_height, height, "height");
  check_cols(preds.main.pixel_height, valid, "height_valid");
  t.pixel_height = half_sum(ag::masked_mae(preds.main.pixel_height, height, valid),
                            ag::masked_mae(preds.style.pixel_height, height, valid));
  t.ground_normal = half_sum(cosine_loss(preds.main.normal, normal),
                             cosine_loss(preds.style.normal, normal));

  t.total = ag::add(
      ag::add(ag::add(ag::scale(t.main, weights.main), ag::scale(t.style, weights.style)),
              ag::add(ag::scale(t.style_adv, weights.style_adv), ag::scale(t.mask, weights.mask))),
      ag::scale(ag::add(t.pixel_height, t.ground_normal), weights.ground));
  return t;
}

const char* loss_term_name(LossTerm t) {
  switch (t) {
    case LossTerm::kMain: return "main";
    case LossTerm::kStyle: return "style";
    case LossTerm::kStyleAdv: return "style_adv";
    case LossTerm::kMask: return "mask";
    case LossTerm::kGround: return "ground";
  }
  return "?";
}

std::uint32_t group_bit(ParamGroup g) { return 1u << static_cast<int>(g); }

RoutingContract RoutingContract::standard(bool adapters_in_main_loss) {
  using G = ParamGroup;
  RoutingContract c;
  c.support[static_cast<int>(LossTerm::kMain)] =
      group_bit(G::kBackbone) | group_bit(G::kGround) | group_bit(G::kFusionMain) |
      group_bit(G::kDecoderMain) | (adapters_in_main_loss ? group_bit(G::kAdapters) : 0u);
  c.support[static_cast<int>(LossTerm::kStyle)] = group_bit(G::kDecoderStyle);
  c.support[static_cast<int>(LossTerm::kStyleAdv)] = group_bit(G::kAdapters);
  c.support[static_cast<int>(LossTerm::kMask)] = group_bit(G::kMaskDecoder) | group_bit(G::kBackbone);
  c.support[static_cast<int>(LossTerm::kGround)] =
      group_bit(G::kGround) | group_bit(G::kAdapters) | group_bit(G::kBackbone);
  return c;
}

bool RoutingContract::allows(LossTerm t, ParamGroup g) const {
  return (support[static_cast<int>(t)] & group_bit(g)) != 0;
}

Var shoe_feature(const FootContactModel& model, const Ctx& ctx, const Image& shoe) {
  const int res = model.resolution();
  const Image img = shoe.height == res && shoe.width == res ? shoe : resize_bilinear(shoe, res, res);
  Ctx frozen = ctx.with_frozen();
  frozen.training = false;
  return model.encoder(frozen, to_network_input(img)).feature;
}

Predictions forward_view(const FootContactModel& model, const Ctx& ctx, const Matrix& view,
                         const Var& shoe, const ViewOptions& options,
                         std::vector<bool>* degenerate_normals) {
  const int res = model.resolution();
  const EncoderOutput enc = model.encoder(ctx, view);
  const int g = enc.feature.height();
  Predictions p;
  p.mask_logits = model.mask_decoder(ctx, enc, res, res);
  // Consumers only see the binarized value, never the decoder graph.
  const Matrix mask_grid = mask_to_grid(binarize_mask(p.mask_logits.value()), res, res, g, g);

  const Randomized ssi = style_randomize(ctx, enc.feature, shoe, model.adapter_prev,
                                         model.adapter_after, options.alpha);
  const BranchOutput main = model.run_branch(ctx, model.main, ssi.out, mask_grid);
  p.main = {main.level_logits, main.pixel_height, main.normal.normal};

  const Randomized ici =
      content_randomize(ctx, enc.feature, shoe, model.adapter_prev, model.adapter_after);
  const BranchOutput style = model.run_branch(ctx, model.style, ici.out, mask_grid, true);
  p.style = {style.level_logits, style.pixel_height, style.normal.normal};

  // Adversarial path: only the adapters stay trainable, and the backbone
  // feature enters as a constant.
  const Ctx adv = ctx.only_group(ParamGroup::kAdapters);
  const Randomized ici_adv = content_randomize(adv, ctx.detach(enc.feature), shoe,
                                               model.adapter_prev, model.adapter_after);
  const GroundPyramid ground = model.ground_encoder(adv, ici_adv.out);
  const Var fused = model.style.fusion(adv, ici_adv.out, ground[3]);
  const Var logits = model.style.decoder(adv, model.style.adapter(adv, fused));
  p.adversarial_logits = project_logits(logits, model.regressors());

  if (degenerate_normals) {
    degenerate_normals->push_back(main.normal.all_masked);
    degenerate_normals->push_back(style.normal.all_masked);
  }
  return p;
}

SampleResult sample_loss(FootContactModel& model, const Ctx& ctx, const Targets& targets,
                         const std::vector<Matrix>& views, const Image& shoe, double alpha,
                         const TrainConfig& config, double grad_scale) {
  if (views.empty()) throw InvalidArgument("sample_loss: no views");
  const Var fs = shoe_feature(model, ctx, shoe);
  const double per_view = 1.0 / static_cast<double>(views.size());
  SampleResult result;
  std::vector<Param*> adapters;
  if (!config.adapters_in_main_loss) {
    for (const auto& p : model.params().params())
      if (p->group == ParamGroup::kAdapters) adapters.push_back(p.get());
  }
  for (const Matrix& view : views) {
    std::vector<bool> degenerate;
    const Predictions preds = forward_view(model, ctx, view, fs, {alpha}, &degenerate);
    const LossTerms terms = compute_losses(preds, targets, config.weights);
    const LossBundle vals = terms.values();
    check_finite(vals);
    result.losses += vals.scaled(per_view);
    result.degenerate_normals += static_cast<int>(std::count(degenerate.begin(), degenerate.end(), true));
    if (grad_scale == 0.0) continue;
    const double s = grad_scale * per_view;
    if (config.adapters_in_main_loss) {
      ag::backward(ag::scale(terms.total, s));
    } else {
      ag::backward(ag::scale(ag::sub(terms.total, ag::scale(terms.main, config.weights.main)), s));
      std::vector<Matrix> saved;
      for (Param* a : adapters) saved.push_back(a->grad);
      ag::backward(ag::scale(terms.main, config.weights.main * s));
      for (std::size_t i = 0; i < adapters.size(); ++i) adapters[i]->grad = saved[i];
    }
  }
  return result;
}

void AdamW::step(ParamStore& store, double lr) {
  const auto& params = store.params();
  if (moments_.size() != params.size()) {
    std::vector<std::pair<std::string, Moments>> fresh;
    fresh.reserve(params.size());
    for (const auto& p : params) {
      auto it = std::find_if(moments_.begin(), moments_.end(),
                             [&](const auto& e) { return e.first == p->name; });
      if (it != moments_.end()) {
        fresh.push_back(std::move(*it));
      } else {
        fresh.push_back({p->name, {Matrix::Zero(p->value.rows(), p->value.cols()),
                                   Matrix::Zero(p->value.rows(), p->value.cols())}});
      }
    }
    moments_ = std::move(fresh);
  }
  ++steps_;
  const double bc1 = 1.0 - std::pow(config_.beta1, static_cast<double>(steps_));
  const double bc2 = 1.0 - std::pow(config_.beta2, static_cast<double>(steps_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    Moments& mo = moments_[i].second;
    p.value *= 1.0 - lr * config_.weight_decay;
    mo.m = config_.beta1 * mo.m + (1.0 - config_.beta1) * p.grad;
    mo.v = config_.beta2 * mo.v + (1.0 - config_.beta2) * p.grad.cwiseAbs2();
    p.value.array() -= lr * (mo.m.array() / bc1) / ((mo.v.array() / bc2).sqrt() + config_.eps);
  }
}

double lr_schedule(int epoch, double base) {
  if (epoch < 0) throw InvalidArgument("lr_schedule: epoch must be >= 0, got " + std::to_string(epoch));
  double lr = base;
  if (epoch >= 5) lr *= 0.9;
  if (epoch >= 10) lr *= 0.9;
  return lr;
}

void TrainConfig::validate() const {
  if (batch_size < 1) throw InvalidArgument("train.batch_size must be >= 1");
  if (steps < 0 || epochs < 0) throw InvalidArgument("train.steps and train.epochs must be >= 0");
  if (!(base_lr > 0)) throw InvalidArgument("train.lr must be positive");
  if (!(adam.beta1 >= 0 && adam.beta1 < 1 && adam.beta2 >= 0 && adam.beta2 < 1)) {
    throw InvalidArgument("train.beta1 and train.beta2 must be in [0, 1)");
  }
  if (!(adam.eps > 0) || adam.weight_decay < 0) {
    throw InvalidArgument("train.eps must be positive and train.weight_decay nonnegative");
  }
  augment_config.validate();
  prorandconv.validate();
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"batch_size", c.batch_size},
                     {"steps", c.steps},
                     {"epochs", c.epochs},
                     {"lr", c.base_lr},
                     {"beta1", c.adam.beta1},
                     {"beta2", c.adam.beta2},
                     {"eps", c.adam.eps},
                     {"weight_decay", c.adam.weight_decay},
                     {"w_main", c.weights.main},
                     {"w_style", c.weights.style},
                     {"w_style_adv", c.weights.style_adv},
                     {"w_mask", c.weights.mask},
                     {"w_ground", c.weights.ground},
                     {"adapters_in_main_loss", c.adapters_in_main_loss},
                     {"augment", c.augment},
                     {"shoe_source", c.shoe_source},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  j.at("batch_size").get_to(c.batch_size);
  j.at("steps").get_to(c.steps);
  j.at("epochs").get_to(c.epochs);
  j.at("lr").get_to(c.base_lr);
  j.at("beta1").get_to(c.adam.beta1);
  j.at("beta2").get_to(c.adam.beta2);
  j.at("eps").get_to(c.adam.eps);
  j.at("weight_decay").get_to(c.adam.weight_decay);
  j.at("w_main").get_to(c.weights.main);
  j.at("w_style").get_to(c.weights.style);
  j.at("w_style_adv").get_to(c.weights.style_adv);
  j.at("w_mask").get_to(c.weights.mask);
  j.at("w_ground").get_to(c.weights.ground);
  j.at("adapters_in_main_loss").get_to(c.adapters_in_main_loss);
  j.at("augment").get_to(c.augment);
  j.at("shoe_source").get_to(c.shoe_source);
  j.at("seed").get_to(c.seed);
}

Trainer::Trainer(FootContactModel& model, std::vector<SceneSample> data, const TrainConfig& config)
    : model_(model),
      data_(std::move(data)),
      config_(config),
      shoes_(ShoeStyleSource::parse(config.shoe_source)),
      optimizer_(config.adam),
      rng_(derive_seed(config.seed, 0x7a)) {
  config_.validate();
  if (data_.empty()) throw InvalidArgument("trainer: no training samples");
  const int res = model_.resolution();
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (data_[i].height() != res || data_[i].width() != res) {
      throw InvalidArgument("trainer: sample " + std::to_string(i) + " is " +
                            std::to_string(data_[i].height()) + "x" +
                            std::to_string(data_[i].width()) + ", model expects " +
                            std::to_string(res) + "x" + std::to_string(res));
    }
    targets_.push_back(Targets::from_sample(data_[i]));
  }
}

long Trainer::steps_per_epoch() const {
  const long n = static_cast<long>(data_.size());
  return (n + config_.batch_size - 1) / config_.batch_size;
}

long Trainer::total_steps() const {
  return config_.epochs > 0 ? config_.epochs * steps_per_epoch() : config_.steps;
}

int Trainer::epoch() const { return static_cast<int>(step_ / steps_per_epoch()); }

std::vector<std::size_t> Trainer::batch_indices(long step) const {
  const long spe = steps_per_epoch();
  const long e = step / spe;
  const long pos = step % spe;
  std::vector<std::size_t> perm(data_.size());
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffle(derive_seed(config_.seed, 0x1000 + static_cast<std::uint64_t>(e)));
  std::shuffle(perm.begin(), perm.end(), shuffle);
  const std::size_t lo = static_cast<std::size_t>(pos) * config_.batch_size;
  const std::size_t hi = std::min(perm.size(), lo + config_.batch_size);
  return {perm.begin() + static_cast<long>(lo), perm.begin() + static_cast<long>(hi)};
}

StepRecord Trainer::step() {
  const Rng saved_rng = rng_;
  ParamStore& store = model_.params();
  store.zero_grad();
  const std::vector<std::size_t> batch = batch_indices(step_);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const int res = model_.resolution();
  StepRecord rec;
  rec.step = step_;
  rec.epoch = epoch();
  rec.lr = current_lr();
  try {
    for (std::size_t idx : batch) {
      SampleDraw d;
      d.alpha = uniform(rng_, 0.0, 1.0);
      d.view_seed = rng_();
      d.shoe_seed = rng_();
      d.augment_seed = rng_();
      const SceneSample* sample = &data_[idx];
      const Targets* targets = &targets_[idx];
      SceneSample augmented;
      Targets aug_targets;
      if (config_.augment) {
        augmented = augment(*sample, d.augment_seed, config_.augment_config);
        aug_targets = Targets::from_sample(augmented);
        sample = &augmented;
        targets = &aug_targets;
      }
      const std::vector<Matrix> views =
          make_views(to_network_input(sample->image), res, res, d.view_seed, config_.prorandconv);
      const Image shoe = sample_shoe_image(shoes_, d.shoe_seed, res);
      Ctx ctx;
      ctx.training = true;
      ctx.routing = config_.routing;
      ctx.rng = &rng_;
      const SampleResult r =
          sample_loss(model_, ctx, *targets, views, shoe, d.alpha, config_, inv_b);
      rec.losses += r.losses.scaled(inv_b);
      rec.degenerate_normals += r.degenerate_normals;
    }
  } catch (...) {
    rng_ = saved_rng;
    store.zero_grad();
    throw;
  }
  optimizer_.step(store, rec.lr);
  ++step_;

  if (telemetry_) {
    const bool fresh = !std::filesystem::exists(*telemetry_) || std::filesystem::file_size(*telemetry_) == 0;
    std::ofstream out(*telemetry_, std::ios::app);
    if (!out) throw IoError("cannot append telemetry to " + telemetry_->string());
    if (fresh) {
      out << "step,epoch,lr,total,main,style,style_adv,mask,pixel_height,ground_normal,"
             "degenerate_normals\n";
    }
    out.precision(10);
    const LossBundle& l = rec.losses;
    out << rec.step << ',' << rec.epoch << ',' << rec.lr << ',' << l.total << ',' << l.main << ','
        << l.style << ',' << l.style_adv << ',' << l.mask << ',' << l.pixel_height << ','
        << l.ground_normal << ',' << rec.degenerate_normals << '\n';
  }
  return rec;
}

std::vector<StepRecord> Trainer::run() {
  std::vector<StepRecord> out;
  while (step_ < total_steps()) out.push_back(step());
  return out;
}

void Trainer::set_telemetry(const std::filesystem::path& csv) { telemetry_ = csv; }

void Trainer::save(const std::filesystem::path& path) const {
  Checkpoint c = snapshot_params(model_);
  c.train = config_;
  c.optimizer_steps = optimizer_.steps();
  c.moments = optimizer_.moments();
  std::ostringstream rs;
  rs << rng_;
  c.rng_state = rs.str();
  c.step = step_;
  c.epoch = epoch();
  save_checkpoint(c, path);
}

void Trainer::load(const std::filesystem::path& path) {
  const Checkpoint c = load_checkpoint(path);
  restore_params(c, model_);
  auto& moments = optimizer_.moments();
  moments.clear();
  for (const auto& p : model_.params().params()) {
    auto it = std::find_if(c.moments.begin(), c.moments.end(),
                           [&](const auto& e) { return e.first == p->name; });
    if (it == c.moments.end()) {
      if (c.optimizer_steps == 0) continue;
      throw FormatError(path.string() + ": checkpoint is missing optimizer state for '" +
                        p->name + "'");
    }
    moments.push_back(*it);
  }
  if (!moments.empty() && moments.size() != model_.params().params().size()) {
    throw FormatError(path.string() + ": checkpoint optimizer state is incomplete");
  }
  optimizer_.set_steps(c.optimizer_steps);
  std::istringstream rs(c.rng_state);
  rs >> rng_;
  if (!rs) throw FormatError(path.string() + ": checkpoint RNG state is corrupt");
  step_ = c.step;
}

namespace {

constexpr char kMagic[8] = {'F', 'C', 'C', 'K', 'P', 'T', '\0', '\n'};

void write_u64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(b), 8);
}

bool read_u64(std::istream& in, std::uint64_t& v) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) return false;
  v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return true;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    write_u64(out, std::bit_cast<std::uint64_t>(m.data()[i]));
  }
}

Matrix read_matrix(std::istream& in, Eigen::Index rows, Eigen::Index cols,
                   const std::filesystem::path& path, const std::string& name) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) {
    std::uint64_t bits;
    if (!read_u64(in, bits)) throw FormatError(path.string() + ": truncated blob '" + name + "'");
    m.data()[i] = std::bit_cast<double>(bits);
  }
  return m;
}

nlohmann::json shape_of(const std::string& name, const Matrix& m) {
  return {{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}};
}

}  // namespace

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  nlohmann::json header;
  header["model"] = c.model;
  header["train"] = c.train ? nlohmann::json(*c.train) : nlohmann::json(nullptr);
  header["optimizer_steps"] = c.optimizer_steps;
  header["rng"] = c.rng_state;
  header["step"] = c.step;
  header["epoch"] = c.epoch;
  header["params"] = nlohmann::json::array();
  for (const auto& [name, m] : c.params) header["params"].push_back(shape_of(name, m));
  header["moments"] = nlohmann::json::array();
  for (const auto& [name, mo] : c.moments) header["moments"].push_back(shape_of(name, mo.m));
  const std::string text = header.dump();

  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + path.string());
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, kCheckpointVersion);
    write_u64(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, m] : c.params) write_matrix(out, m);
    for (const auto& [name, mo] : c.moments) {
      write_matrix(out, mo.m);
      write_matrix(out, mo.v);
    }
    if (!out) throw IoError("failed writing checkpoint " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  char magic[sizeof(kMagic)];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError(path.string() + ": not a footcontact checkpoint (bad magic header)");
  }
  std::uint64_t version = 0, len = 0;
  if (!read_u64(in, version)) throw FormatError(path.string() + ": truncated checkpoint header");
  if (version != kCheckpointVersion) {
    throw FormatError(path.string() + ": checkpoint format version " + std::to_string(version) +
                      " is not supported (expected " + std::to_string(kCheckpointVersion) + ")");
  }
  if (!read_u64(in, len) || len > (1u << 28)) {
    throw FormatError(path.string() + ": corrupt checkpoint header length");
  }
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw FormatError(path.string() + ": truncated checkpoint header");
  }
  Checkpoint c;
  try {
    const nlohmann::json h = nlohmann::json::parse(text);
    c.model = h.at("model").get<ModelConfig>();
    if (!h.at("train").is_null()) c.train = h.at("train").get<TrainConfig>();
    c.optimizer_steps = h.at("optimizer_steps").get<long>();
    c.rng_state = h.at("rng").get<std::string>();
    c.step = h.at("step").get<long>();
    c.epoch = h.at("epoch").get<int>();
    for (const auto& p : h.at("params")) {
      const auto name = p.at("name").get<std::string>();
      c.params.push_back({name, read_matrix(in, p.at("rows").get<Eigen::Index>(),
                                            p.at("cols").get<Eigen::Index>(), path, name)});
    }
    for (const auto& p : h.at("moments")) {
      const auto name = p.at("name").get<std::string>();
      const auto rows = p.at("rows").get<Eigen::Index>();
      const auto cols = p.at("cols").get<Eigen::Index>();
      AdamW::Moments mo;
      mo.m = read_matrix(in, rows, cols, path, name + " (adam m)");
      mo.v = read_matrix(in, rows, cols, path, name + " (adam v)");
      c.moments.push_back({name, std::move(mo)});
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": corrupt checkpoint header: " + e.what());
  }
  return c;
}

Checkpoint snapshot_params(const FootContactModel& model) {
  Checkpoint c;
  c.model = model.config();
  for (const auto& p : model.params().params()) c.params.push_back({p->name, p->value});
  return c;
}

void restore_params(const Checkpoint& c, FootContactModel& model) {
  for (const auto& p : model.params().params()) {
    auto it = std::find_if(c.params.begin(), c.params.end(),
                           [&](const auto& e) { return e.first == p->name; });
    if (it == c.params.end()) throw FormatError("checkpoint is missing parameter '" + p->name + "'");
    if (it->second.rows() != p->value.rows() || it->second.cols() != p->value.cols()) {
      throw FormatError("checkpoint parameter '" + p->name + "' has the wrong shape");
    }
    p->value = it->second;
  }
}

}  // namespace footcontact
