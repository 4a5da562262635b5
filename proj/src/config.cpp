// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "footcontact/evalcli.hpp"

namespace footcontact {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string num(int v) { return std::to_string(v); }
std::string num(std::uint64_t v) { return std::to_string(v); }
std::string flag(bool v) { return v ? "true" : "false"; }

ModelConfig profile_model(const std::string& profile) {
  if (profile == "desk") return ModelConfig::desk();
  if (profile == "paper") return ModelConfig::paper();
  throw InvalidArgument("profile must be desk or paper, got '" + profile + "'");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> config_defaults() {
  const ModelConfig m = ModelConfig::desk();
  const TrainConfig t;
  const SceneConfig s;
  const AugmentConfig a;
  const ProRandConvConfig p;
  const RansacParams r;
  return {
      {"profile", "desk"},
      {"model.resolution", num(m.encoder.resolution)},
      {"model.patch", num(m.encoder.patch)},
      {"model.dim", num(m.encoder.dim)},
      {"model.depth", num(m.encoder.depth)},
      {"model.heads", num(m.encoder.heads)},
      {"model.mlp_ratio", num(m.encoder.mlp_ratio)},
      {"model.dpt_features", num(m.dpt_features)},
      {"model.attention_channels", num(m.attention_channels)},
      {"model.dropout", num(m.dropout)},
      {"model.normal_hidden", num(m.normal_hidden)},
      {"model.decoder_dim", num(m.decoder.dim)},
      {"model.decoder_depth", num(m.decoder.depth)},
      {"model.decoder_heads", num(m.decoder.heads)},
      {"model.decoder_ff_ratio", num(m.decoder.ff_ratio)},
      {"model.decoder_positional", flag(m.decoder.positional)},
      {"model.mesh_seed", num(m.mesh_seed)},
      {"model.init_seed", num(m.init_seed)},
      {"train.batch_size", num(t.batch_size)},
      {"train.steps", num(t.steps)},
      {"train.epochs", num(t.epochs)},
      {"train.lr", num(t.base_lr)},
      {"train.beta1", num(t.adam.beta1)},
      {"train.beta2", num(t.adam.beta2)},
      {"train.eps", num(t.adam.eps)},
      {"train.weight_decay", num(t.adam.weight_decay)},
      {"train.w_main", num(t.weights.main)},
      {"train.w_style", num(t.weights.style)},
      {"train.w_style_adv", num(t.weights.style_adv)},
      {"train.w_mask", num(t.weights.mask)},
      {"train.w_ground", num(t.weights.ground)},
      {"train.adapters_in_main_loss", flag(t.adapters_in_main_loss)},
      {"train.augment", flag(t.augment)},
      {"train.shoe_source", t.shoe_source},
      {"train.seed", num(t.seed)},
      {"randconv.max_repeats", num(p.max_repeats)},
      {"randconv.weight_std_min", num(p.weight_std_min)},
      {"randconv.weight_std_max", num(p.weight_std_max)},
      {"randconv.offset_std", num(p.offset_std)},
      {"randconv.gamma_min", num(p.gamma_min)},
      {"randconv.gamma_max", num(p.gamma_max)},
      {"randconv.beta_min", num(p.beta_min)},
      {"randconv.beta_max", num(p.beta_max)},
      {"data.count", "32"},
      {"data.seed", "0"},
      {"data.resolution", "model.resolution"},
      {"data.tolerance", num(s.tolerance)},
      {"data.contact_ratio", num(s.contact_ratio)},
      {"data.hover_min", num(s.hover_min)},
      {"data.hover_max", num(s.hover_max)},
      {"data.max_slope", num(s.max_slope)},
      {"data.max_tilt_deg", num(s.max_tilt_deg)},
      {"data.camera_distance_min", num(s.camera_distance_min)},
      {"data.camera_distance_max", num(s.camera_distance_max)},
      {"data.elevation_min_deg", num(s.elevation_min_deg)},
      {"data.elevation_max_deg", num(s.elevation_max_deg)},
      {"data.fov_deg", num(s.fov_deg)},
      {"augment.scale_min", num(a.scale_min)},
      {"augment.scale_max", num(a.scale_max)},
      {"augment.max_rotation_deg", num(a.max_rotation_deg)},
      {"augment.max_shift", num(a.max_shift)},
      {"augment.lowres_prob", num(a.lowres_prob)},
      {"augment.lowres_max_factor", num(a.lowres_max_factor)},
      {"augment.noise_prob", num(a.noise_prob)},
      {"augment.noise_max_std", num(a.noise_max_std)},
      {"augment.blur_prob", num(a.blur_prob)},
      {"augment.blur_max_sigma", num(a.blur_max_sigma)},
      {"ransac.iterations", num(r.iterations)},
      {"ransac.inlier_distance", num(r.inlier_distance)},
      {"ransac.percentile_p", num(r.percentile_p)},
      {"ransac.seed", num(r.seed)},
  };
}

Config Config::parse(const std::string& text, const std::string& origin) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw FormatError(origin + ":" + std::to_string(n) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw FormatError(origin + ":" + std::to_string(n) + ": empty key");
    c.values_[key] = trim(line.substr(eq + 1));
  }
  return c;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

void Config::set(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw InvalidArgument("override must look like key=value: '" + assignment + "'");
  }
  values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

void Config::check_known() const {
  std::set<std::string> known;
  for (const auto& [k, v] : config_defaults()) known.insert(k);
  for (const auto& [k, v] : values_) {
    if (!known.count(k)) throw InvalidArgument("unknown config key '" + k + "'");
  }
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

long Config::get_int(const std::string& key, long fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  long v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidArgument("config key '" + key + "' expects an integer, got '" + s + "'");
  }
  return v;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  double v = 0;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
    throw InvalidArgument("config key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& s = it->second;
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  throw InvalidArgument("config key '" + key + "' expects true or false, got '" + s + "'");
}

ModelConfig Config::model() const {
  ModelConfig m = profile_model(get_string("profile", "desk"));
  auto i = [&](const char* k, int& dst) { dst = static_cast<int>(get_int(k, dst)); };
  i("model.resolution", m.encoder.resolution);
  i("model.patch", m.encoder.patch);
  i("model.dim", m.encoder.dim);
  i("model.depth", m.encoder.depth);
  i("model.heads", m.encoder.heads);
  i("model.mlp_ratio", m.encoder.mlp_ratio);
  i("model.dpt_features", m.dpt_features);
  i("model.attention_channels", m.attention_channels);
  m.dropout = get_double("model.dropout", m.dropout);
  i("model.normal_hidden", m.normal_hidden);
  i("model.decoder_dim", m.decoder.dim);
  i("model.decoder_depth", m.decoder.depth);
  i("model.decoder_heads", m.decoder.heads);
  i("model.decoder_ff_ratio", m.decoder.ff_ratio);
  m.decoder.positional = get_bool("model.decoder_positional", m.decoder.positional);
  m.mesh_seed = static_cast<std::uint64_t>(get_int("model.mesh_seed", static_cast<long>(m.mesh_seed)));
  m.init_seed = static_cast<std::uint64_t>(get_int("model.init_seed", static_cast<long>(m.init_seed)));
  m.validate();
  return m;
}

TrainConfig Config::train() const {
  TrainConfig t;
  t.batch_size = static_cast<int>(get_int("train.batch_size", t.batch_size));
  t.steps = static_cast<int>(get_int("train.steps", t.steps));
  t.epochs = static_cast<int>(get_int("train.epochs", t.epochs));
  t.base_lr = get_double("train.lr", t.base_lr);
  t.adam.beta1 = get_double("train.beta1", t.adam.beta1);
  t.adam.beta2 = get_double("train.beta2", t.adam.beta2);
  t.adam.eps = get_double("train.eps", t.adam.eps);
  t.adam.weight_decay = get_double("train.weight_decay", t.adam.weight_decay);
  t.weights.main = get_double("train.w_main", t.weights.main);
  t.weights.style = get_double("train.w_style", t.weights.style);
  t.weights.style_adv = get_double("train.w_style_adv", t.weights.style_adv);
  t.weights.mask = get_double("train.w_mask", t.weights.mask);
  t.weights.ground = get_double("train.w_ground", t.weights.ground);
  t.adapters_in_main_loss = get_bool("train.adapters_in_main_loss", t.adapters_in_main_loss);
  t.augment = get_bool("train.augment", t.augment);
  t.augment_config = augment();
  t.shoe_source = get_string("train.shoe_source", t.shoe_source);
  t.seed = static_cast<std::uint64_t>(get_int("train.seed", static_cast<long>(t.seed)));
  ProRandConvConfig& p = t.prorandconv;
  p.max_repeats = static_cast<int>(get_int("randconv.max_repeats", p.max_repeats));
  p.weight_std_min = get_double("randconv.weight_std_min", p.weight_std_min);
  p.weight_std_max = get_double("randconv.weight_std_max", p.weight_std_max);
  p.offset_std = get_double("randconv.offset_std", p.offset_std);
  p.gamma_min = get_double("randconv.gamma_min", p.gamma_min);
  p.gamma_max = get_double("randconv.gamma_max", p.gamma_max);
  p.beta_min = get_double("randconv.beta_min", p.beta_min);
  p.beta_max = get_double("randconv.beta_max", p.beta_max);
  t.validate();
  return t;
}

SceneConfig Config::scene() const {
  SceneConfig s;
  s.resolution = has("data.resolution") ? static_cast<int>(get_int("data.resolution", 0))
                                        : model().encoder.resolution;
  s.tolerance = get_double("data.tolerance", s.tolerance);
  s.contact_ratio = get_double("data.contact_ratio", s.contact_ratio);
  s.hover_min = get_double("data.hover_min", s.hover_min);
  s.hover_max = get_double("data.hover_max", s.hover_max);
  s.max_slope = get_double("data.max_slope", s.max_slope);
  s.max_tilt_deg = get_double("data.max_tilt_deg", s.max_tilt_deg);
  s.camera_distance_min = get_double("data.camera_distance_min", s.camera_distance_min);
  s.camera_distance_max = get_double("data.camera_distance_max", s.camera_distance_max);
  s.elevation_min_deg = get_double("data.elevation_min_deg", s.elevation_min_deg);
  s.elevation_max_deg = get_double("data.elevation_max_deg", s.elevation_max_deg);
  s.fov_deg = get_double("data.fov_deg", s.fov_deg);
  s.mesh_seed = static_cast<std::uint64_t>(get_int("model.mesh_seed", 0));
  s.validate();
  return s;
}

AugmentConfig Config::augment() const {
  AugmentConfig a;
  a.scale_min = get_double("augment.scale_min", a.scale_min);
  a.scale_max = get_double("augment.scale_max", a.scale_max);
  a.max_rotation_deg = get_double("augment.max_rotation_deg", a.max_rotation_deg);
  a.max_shift = get_double("augment.max_shift", a.max_shift);
  a.lowres_prob = get_double("augment.lowres_prob", a.lowres_prob);
  a.lowres_max_factor = static_cast<int>(get_int("augment.lowres_max_factor", a.lowres_max_factor));
  a.noise_prob = get_double("augment.noise_prob", a.noise_prob);
  a.noise_max_std = get_double("augment.noise_max_std", a.noise_max_std);
  a.blur_prob = get_double("augment.blur_prob", a.blur_prob);
  a.blur_max_sigma = get_double("augment.blur_max_sigma", a.blur_max_sigma);
  a.validate();
  return a;
}

}  // namespace footcontact
