// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

#include "footcontact/synth_dataset.hpp"

namespace footcontact {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kRecordVersion = 1;

json mat3_to_json(const Eigen::Matrix3d& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) a.push_back(m(r, c));
  return a;
}

Eigen::Matrix3d mat3_from_json(const json& a) {
  Eigen::Matrix3d m;
  if (a.size() != 9) throw FormatError("expected 9 values for a 3x3 matrix");
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = a.at(3 * r + c).get<double>();
  return m;
}

json vec3_to_json(const Eigen::Vector3d& v) { return json::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d vec3_from_json(const json& a) {
  if (a.size() != 3) throw FormatError("expected 3 values for a vector");
  return {a.at(0).get<double>(), a.at(1).get<double>(), a.at(2).get<double>()};
}

json labels_to_json(const SceneSample& s) {
  const SceneMeta& m = s.meta;
  json plane = {{"a", m.plane.a},
                {"b", m.plane.b},
                {"c", m.plane.c},
                {"height_axis", m.plane.axes.height_axis},
                {"ground_axes", {m.plane.axes.ground_axis1, m.plane.axes.ground_axis2}},
                {"negative_height", m.plane.axes.negative_height}};
  json camera = {{"fx", m.camera.fx},         {"fy", m.camera.fy},
                 {"cx", m.camera.cx},         {"cy", m.camera.cy},
                 {"width", m.camera.width},   {"height", m.camera.height},
                 {"rotation", mat3_to_json(m.camera.rotation)},
                 {"position", vec3_to_json(m.camera.position)}};
  return {{"format", "footcontact-record"},
          {"version", kRecordVersion},
          {"vertex_contact", s.vertex_contact},
          {"joint11", s.joint11},
          {"joint3", s.joint3},
          {"ground_normal", vec3_to_json(s.ground_normal)},
          {"augment_warning", s.augment_warning},
          {"meta",
           {{"seed", m.seed},
            {"mesh_seed", m.mesh_seed},
            {"hover", m.hover},
            {"tolerance", m.tolerance},
            {"plane", plane},
            {"camera", camera},
            {"foot_rotation", mat3_to_json(m.foot_rotation)},
            {"foot_translation", vec3_to_json(m.foot_translation)}}}};
}

void labels_from_json(const json& j, SceneSample& s) {
  if (j.at("format").get<std::string>() != "footcontact-record") {
    throw FormatError("not a footcontact record");
  }
  if (j.at("version").get<int>() != kRecordVersion) {
    throw FormatError("unsupported record version " + j.at("version").dump());
  }
  s.vertex_contact = j.at("vertex_contact").get<std::vector<int>>();
  s.joint11 = j.at("joint11").get<std::vector<int>>();
  s.joint3 = j.at("joint3").get<std::vector<int>>();
  s.ground_normal = vec3_from_json(j.at("ground_normal"));
  s.augment_warning = j.at("augment_warning").get<bool>();
  const json& m = j.at("meta");
  SceneMeta& meta = s.meta;
  meta.seed = m.at("seed").get<std::uint64_t>();
  meta.mesh_seed = m.at("mesh_seed").get<std::uint64_t>();
  meta.hover = m.at("hover").get<double>();
  meta.tolerance = m.at("tolerance").get<double>();
  const json& p = m.at("plane");
  meta.plane.a = p.at("a").get<double>();
  meta.plane.b = p.at("b").get<double>();
  meta.plane.c = p.at("c").get<double>();
  meta.plane.axes.height_axis = p.at("height_axis").get<int>();
  meta.plane.axes.ground_axis1 = p.at("ground_axes").at(0).get<int>();
  meta.plane.axes.ground_axis2 = p.at("ground_axes").at(1).get<int>();
  meta.plane.axes.negative_height = p.at("negative_height").get<bool>();
  const json& c = m.at("camera");
  meta.camera.fx = c.at("fx").get<double>();
  meta.camera.fy = c.at("fy").get<double>();
  meta.camera.cx = c.at("cx").get<double>();
  meta.camera.cy = c.at("cy").get<double>();
  meta.camera.width = c.at("width").get<int>();
  meta.camera.height = c.at("height").get<int>();
  meta.camera.rotation = mat3_from_json(c.at("rotation"));
  meta.camera.position = vec3_from_json(c.at("position"));
  meta.foot_rotation = mat3_from_json(m.at("foot_rotation"));
  meta.foot_translation = vec3_from_json(m.at("foot_translation"));
}

}  // namespace

std::string record_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "sample_%06zu", index);
  return buf;
}

void write_record(const SceneSample& sample, const fs::path& dir) {
  const std::size_t n = static_cast<std::size_t>(sample.width()) * sample.height();
  if (sample.foot_mask.size() != n || sample.pixel_height.size() != n ||
      sample.height_valid.size() != n) {
    throw InvalidArgument("write_record: channel sizes do not match the image");
  }
  const fs::path parent = dir.has_parent_path() ? dir.parent_path() : fs::path(".");
  fs::create_directories(parent);
  const fs::path tmp = parent / (".tmp-" + dir.filename().string() + "-" +
                                 std::to_string(mix_seed(sample.meta.seed ^ n)));
  fs::remove_all(tmp);
  fs::create_directories(tmp);

  write_png(sample.image, tmp / "image.png");
  Image mask(1, sample.height(), sample.width());
  for (std::size_t i = 0; i < n; ++i) mask.data[i] = sample.foot_mask[i] ? 1.0f : 0.0f;
  write_png(mask, tmp / "mask.png");
  std::vector<float> heights(n);
  for (std::size_t i = 0; i < n; ++i) {
    heights[i] = sample.height_valid[i] ? sample.pixel_height[i]
                                        : std::numeric_limits<float>::quiet_NaN();
  }
  write_pfm(tmp / "height.pfm", heights, sample.height(), sample.width());
  {
    std::ofstream out(tmp / "labels.json");
    if (!out) throw IoError("cannot write " + (tmp / "labels.json").string());
    out << labels_to_json(sample).dump(1) << '\n';
    if (!out) throw IoError("failed writing " + (tmp / "labels.json").string());
  }
  fs::remove_all(dir);
  fs::rename(tmp, dir);
}

SceneSample read_record(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("record directory not found: " + dir.string());
  SceneSample s;
  s.image = read_png(dir / "image.png", 3);
  const Image mask = read_png(dir / "mask.png", 1);
  int hh = 0, hw = 0;
  const std::vector<float> heights = read_pfm(dir / "height.pfm", hh, hw);
  if (mask.height != s.image.height || mask.width != s.image.width) {
    throw FormatError((dir / "mask.png").string() + ": size differs from image.png");
  }
  if (hh != s.image.height || hw != s.image.width) {
    throw FormatError((dir / "height.pfm").string() + ": size differs from image.png");
  }
  const std::size_t n = heights.size();
  s.foot_mask.resize(n);
  s.pixel_height.resize(n);
  s.height_valid.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    s.foot_mask[i] = mask.data[i] > 0.5f ? 1 : 0;
    const bool valid = !std::isnan(heights[i]);
    s.height_valid[i] = valid ? 1 : 0;
    s.pixel_height[i] = valid ? heights[i] : 0.0f;
  }
  const fs::path labels = dir / "labels.json";
  std::ifstream in(labels);
  if (!in) throw IoError("cannot read " + labels.string());
  try {
    labels_from_json(json::parse(in), s);
  } catch (const json::exception& e) {
    throw FormatError(labels.string() + ": " + e.what());
  } catch (const FormatError& e) {
    throw FormatError(labels.string() + ": " + e.what());
  }
  return s;
}

RecordDataset::RecordDataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError("dataset directory not found: " + root.string());
  for (const auto& entry : fs::directory_iterator(root)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.rfind("sample_", 0) == 0) dirs_.push_back(entry.path());
  }
  std::sort(dirs_.begin(), dirs_.end());
}

}  // namespace footcontact
