// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Losses, gradient routing, the AdamW optimizer, the training loop and
// checkpoints.

#pragma once

#include <array>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "footcontact/model.hpp"
#include "footcontact/synth_dataset.hpp"

namespace footcontact {

struct LossWeights {
  double main = 1.0;
  double style = 1.0;
  double style_adv = 1.0;
  double mask = 1.0;
  double ground = 1.0;
};

struct LossBundle {
  double main = 0;
  double style = 0;
  double style_adv = 0;
  double mask = 0;
  double pixel_height = 0;
  double ground_normal = 0;
  double total = 0;

  LossBundle& operator+=(const LossBundle& o);
  LossBundle scaled(double s) const;
};

// Supervision for one sample; each channel is optional so a missing one
// can be reported by name.
struct Targets {
  std::optional<Matrix> vertex;   // 1 x 265
  std::optional<Matrix> joint11;  // 1 x 11
  std::optional<Matrix> joint3;   // 1 x 3
  std::optional<Matrix> mask;     // 1 x (H*W)
  std::optional<Matrix> height;   // 1 x (H*W), pixels
  std::optional<Matrix> height_valid;
  std::optional<Eigen::Vector3d> normal;

  static Targets from_sample(const SceneSample& sample);
};

struct BranchPredictions {
  std::vector<ag::Var> level_logits;  // vertex, joint11, joint3
  ag::Var pixel_height;
  ag::Var normal;
};

struct Predictions {
  ag::Var mask_logits;
  BranchPredictions main;
  BranchPredictions style;
  std::vector<ag::Var> adversarial_logits;
};

struct LossTerms {
  ag::Var main, style, style_adv, mask, pixel_height, ground_normal, total;

  LossBundle values() const;
};

// Throws InvalidArgument("missing target channel: <name>").
LossTerms compute_losses(const Predictions& preds, const Targets& targets,
                         const LossWeights& weights = {});

enum class LossTerm { kMain, kStyle, kStyleAdv, kMask, kGround };
inline constexpr std::array<LossTerm, 5> kAllLossTerms{
    LossTerm::kMain, LossTerm::kStyle, LossTerm::kStyleAdv, LossTerm::kMask, LossTerm::kGround};
const char* loss_term_name(LossTerm t);

// Parameter groups each loss term may update.
struct RoutingContract {
  std::array<std::uint32_t, 5> support{};

  static RoutingContract standard(bool adapters_in_main_loss = true);
  bool allows(LossTerm t, ParamGroup g) const;
};

std::uint32_t group_bit(ParamGroup g);

struct ViewOptions {
  double alpha = 1.0;  // style interpolation weight of the main branch
};

// Forward pass of one view through both branches and the adversarial path.
// shoe_feature is the encoder output for the shoe image.
Predictions forward_view(const FootContactModel& model, const Ctx& ctx, const Matrix& view,
                         const ag::Var& shoe_feature, const ViewOptions& options,
                         std::vector<bool>* degenerate_normals = nullptr);

ag::Var shoe_feature(const FootContactModel& model, const Ctx& ctx, const Image& shoe);

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

class AdamW {
 public:
  AdamW() = default;
  explicit AdamW(const AdamWConfig& config) : config_(config) {}

  void step(ParamStore& store, double lr);
  long steps() const { return steps_; }
  const AdamWConfig& config() const { return config_; }

  struct Moments {
    Matrix m;
    Matrix v;
  };
  // Keyed by parameter name.
  std::vector<std::pair<std::string, Moments>>& moments() { return moments_; }
  const std::vector<std::pair<std::string, Moments>>& moments() const { return moments_; }
  void set_steps(long s) { steps_ = s; }

 private:
  AdamWConfig config_;
  long steps_ = 0;
  std::vector<std::pair<std::string, Moments>> moments_;
};

// base * 0.9^(number of milestones {5, 10} reached).
double lr_schedule(int epoch, double base = 1e-5);

struct TrainConfig {
  int batch_size = 4;
  int steps = 200;
  int epochs = 0;  // when > 0, overrides steps
  double base_lr = 1e-5;
  AdamWConfig adam;
  LossWeights weights;
  bool adapters_in_main_loss = true;
  bool augment = false;
  AugmentConfig augment_config;
  ProRandConvConfig prorandconv;
  std::string shoe_source = "procedural";
  std::uint64_t seed = 0;
  bool routing = true;

  void validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

// Per-step random draws for one sample.
struct SampleDraw {
  double alpha = 1.0;
  std::uint64_t view_seed = 0;
  std::uint64_t shoe_seed = 0;
  std::uint64_t augment_seed = 0;
};

// Loss of one sample averaged over its views. When grad_scale != 0 the
// gradient of grad_scale * total is accumulated into the parameters.
struct SampleResult {
  LossBundle losses;
  int degenerate_normals = 0;
};
SampleResult sample_loss(FootContactModel& model, const Ctx& ctx, const Targets& targets,
                         const std::vector<Matrix>& views, const Image& shoe, double alpha,
                         const TrainConfig& config, double grad_scale);

struct StepRecord {
  long step = 0;
  int epoch = 0;
  double lr = 0;
  LossBundle losses;
  int degenerate_normals = 0;
};

class Trainer {
 public:
  Trainer(FootContactModel& model, std::vector<SceneSample> data, const TrainConfig& config);

  // One optimizer update. On a non-finite loss the parameters, optimizer
  // and RNG are left untouched and NonFiniteLoss names the term.
  StepRecord step();
  // Runs until total_steps() and returns the per-step records.
  std::vector<StepRecord> run();

  long global_step() const { return step_; }
  int epoch() const;
  long steps_per_epoch() const;
  long total_steps() const;
  double current_lr() const { return lr_schedule(epoch(), config_.base_lr); }

  void set_telemetry(const std::filesystem::path& csv);

  void save(const std::filesystem::path& path) const;
  void load(const std::filesystem::path& path);

  const TrainConfig& config() const { return config_; }
  FootContactModel& model() { return model_; }
  const AdamW& optimizer() const { return optimizer_; }
  const Rng& rng() const { return rng_; }

 private:
  std::vector<std::size_t> batch_indices(long step) const;

  FootContactModel& model_;
  std::vector<SceneSample> data_;
  std::vector<Targets> targets_;
  TrainConfig config_;
  ShoeStyleSource shoes_;
  AdamW optimizer_;
  Rng rng_;
  long step_ = 0;
  std::optional<std::filesystem::path> telemetry_;
};

// Checkpoint file: magic, format version, configs, named parameter blobs,
// AdamW moments and step count, RNG state and progress counters.
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ModelConfig model;
  std::optional<TrainConfig> train;
  std::vector<std::pair<std::string, Matrix>> params;
  long optimizer_steps = 0;
  std::vector<std::pair<std::string, AdamW::Moments>> moments;
  std::string rng_state;
  long step = 0;
  int epoch = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);
// Copies blobs into the model's parameters; a missing or mis-shaped blob
// throws FormatError naming it.
void restore_params(const Checkpoint& ckpt, FootContactModel& model);
Checkpoint snapshot_params(const FootContactModel& model);

}  // namespace footcontact
