// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Contact metrics, heatmap plots, the key = value config format and the
// command-line front end.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "footcontact/foot_mesh.hpp"
#include "footcontact/model.hpp"
#include "footcontact/synth_dataset.hpp"
#include "footcontact/training.hpp"

namespace footcontact {

// Predictions count as contact when the probability exceeds this.
inline constexpr double kContactThreshold = 0.5;

struct SampleMetrics {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
};

struct MetricReport {
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  long n_evaluated = 0;
  long n_skipped = 0;
};

// nullopt when gt has no positive (the sample is skipped). precision is 0
// when nothing is predicted, f1 is 0 when precision + recall is 0.
std::optional<SampleMetrics> sample_metrics(const Vector& probs, const std::vector<int>& gt);

// Per-sample metrics averaged over evaluated samples.
MetricReport evaluate(const std::vector<Vector>& probs, const std::vector<std::vector<int>>& gt);

// 3-vectors (big toe, small toe, heel) reduced to (toe = big OR small, heel).
MetricReport evaluate_joint3(const std::vector<Vector>& probs,
                             const std::vector<std::vector<int>>& gt);

void to_json(nlohmann::json& j, const MetricReport& r);

// Side and sole views side by side, vertex colours from blue (0) to red (1).
void emit_plot(const Vector& probs, const FootMesh& mesh, const std::filesystem::path& path,
               int view_size = 256);
Eigen::Vector3d probability_color(double p);

// Flat "key = value" text; '#' starts a comment.
class Config {
 public:
  static Config parse(const std::string& text, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  // "key=value" override.
  void set(const std::string& assignment);
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::map<std::string, std::string>& values() const { return values_; }

  // Throws InvalidArgument naming the first unknown key.
  void check_known() const;

  // Profile given by "profile" (desk or paper), then model.* keys.
  ModelConfig model() const;
  TrainConfig train() const;
  SceneConfig scene() const;
  AugmentConfig augment() const;

  std::string get_string(const std::string& key, const std::string& fallback) const;
  long get_int(const std::string& key, long fallback) const;
  double get_double(const std::string& key, double fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;

 private:
  std::map<std::string, std::string> values_;
};

// Every recognised key with its default, in documentation order.
std::vector<std::pair<std::string, std::string>> config_defaults();

// Exit codes: 0 success, 1 runtime failure, 2 usage error.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace footcontact
