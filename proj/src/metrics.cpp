// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <nlohmann/json.hpp>

#include "footcontact/evalcli.hpp"

namespace footcontact {

std::optional<SampleMetrics> sample_metrics(const Vector& probs, const std::vector<int>& gt) {
  if (static_cast<std::size_t>(probs.size()) != gt.size()) {
    throw InvalidArgument("prediction has " + std::to_string(probs.size()) +
                          " entries but ground truth has " + std::to_string(gt.size()));
  }
  long tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const bool p = probs(static_cast<Eigen::Index>(i)) > kContactThreshold;
    const bool g = gt[i] != 0;
    tp += p && g;
    fp += p && !g;
    fn += !p && g;
  }
  if (tp + fn == 0) return std::nullopt;
  SampleMetrics m;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  const double s = m.precision + m.recall;
  m.f1 = s > 0 ? 2.0 * m.precision * m.recall / s : 0.0;
  return m;
}

MetricReport evaluate(const std::vector<Vector>& probs, const std::vector<std::vector<int>>& gt) {
  if (probs.size() != gt.size()) {
    throw InvalidArgument("evaluate: " + std::to_string(probs.size()) + " predictions for " +
                          std::to_string(gt.size()) + " ground-truth samples");
  }
  MetricReport r;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const auto m = sample_metrics(probs[i], gt[i]);
    if (!m) {
      ++r.n_skipped;
      continue;
    }
    ++r.n_evaluated;
    r.precision += m->precision;
    r.recall += m->recall;
    r.f1 += m->f1;
  }
  if (r.n_evaluated > 0) {
    const double n = static_cast<double>(r.n_evaluated);
    r.precision /= n;
    r.recall /= n;
    r.f1 /= n;
  }
  return r;
}

MetricReport evaluate_joint3(const std::vector<Vector>& probs,
                             const std::vector<std::vector<int>>& gt) {
  if (probs.size() != gt.size()) throw InvalidArgument("evaluate_joint3: sample count mismatch");
  std::vector<Vector> p2;
  std::vector<std::vector<int>> g2;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i].size() != 3 || gt[i].size() != 3) {
      throw InvalidArgument("evaluate_joint3: sample " + std::to_string(i) +
                            " is not a (big toe, small toe, heel) triple");
    }
    const bool toe = probs[i](0) > kContactThreshold || probs[i](1) > kContactThreshold;
    const bool heel = probs[i](2) > kContactThreshold;
    p2.push_back(Eigen::Vector2d(toe ? 1.0 : 0.0, heel ? 1.0 : 0.0));
    g2.push_back({(gt[i][0] || gt[i][1]) ? 1 : 0, gt[i][2] ? 1 : 0});
  }
  return evaluate(p2, g2);
}

void to_json(nlohmann::json& j, const MetricReport& r) {
  j = nlohmann::json{{"precision", r.precision},
                     {"recall", r.recall},
                     {"f1", r.f1},
                     {"n_evaluated", r.n_evaluated},
                     {"n_skipped", r.n_skipped},
                     {"threshold", kContactThreshold},
                     {"averaging", "per-sample mean"},
                     {"empty_prediction_precision", 0.0}};
}

}  // namespace footcontact
