// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

// Synthetic foot-on-ground scenes with analytic ground truth, their
// augmentation, and the on-disk record format.

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "footcontact/foot_mesh.hpp"
#include "footcontact/ground_geometry.hpp"
#include "footcontact/image.hpp"

namespace footcontact {

// Pinhole camera, OpenCV convention: x right, y down, z forward. Pixel
// (col, row) has its centre at (col + 0.5, row + 0.5).
struct Camera {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0;
  int height = 0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
  Eigen::Vector3d position = Eigen::Vector3d::Zero();      // centre in world

  static Camera look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                        const Eigen::Vector3d& world_up, double fov_deg, int width,
                        int height);

  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation * (world - position);
  }
  // (u, v) in pixels.
  Eigen::Vector2d project(const Eigen::Vector3d& world) const;
  // Unit world-space direction through image point (u, v).
  Eigen::Vector3d ray(double u, double v) const;
};

struct SceneConfig {
  int resolution = 224;
  double tolerance = tolerance::kMoyo;
  double contact_ratio = 0.5;
  double hover_min = 0.02;
  double hover_max = 0.12;
  std::optional<double> hover;  // forces the foot elevation when set
  double max_slope = 0.15;
  double max_tilt_deg = 10.0;
  double camera_distance_min = 0.45;
  double camera_distance_max = 0.6;
  double elevation_min_deg = 15.0;
  double elevation_max_deg = 40.0;
  double fov_deg = 35.0;
  std::uint64_t mesh_seed = 0;

  void validate() const;
};

struct SceneMeta {
  std::uint64_t seed = 0;
  std::uint64_t mesh_seed = 0;
  double hover = 0;
  double tolerance = 0;
  GroundPlane plane;
  Camera camera;
  // Posed vertex i = foot_rotation * canonical_i + foot_translation.
  Eigen::Matrix3d foot_rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d foot_translation = Eigen::Vector3d::Zero();
};

struct SceneSample {
  Image image;                       // 3 x H x W in [0, 1]
  std::vector<std::uint8_t> foot_mask;  // H*W, 0/1
  std::vector<float> pixel_height;   // H*W, pixels
  std::vector<std::uint8_t> height_valid;
  Eigen::Vector3d ground_normal = Eigen::Vector3d::UnitY();  // camera frame
  std::vector<int> vertex_contact;
  std::vector<int> joint11;
  std::vector<int> joint3;
  SceneMeta meta;
  bool augment_warning = false;

  int height() const { return image.height; }
  int width() const { return image.width; }
};

struct SceneGeometry {
  Vertices vertices;  // posed, world frame
  std::vector<Face> faces;
  GroundPlane plane;
  Camera camera;
};

struct PixelHeightMap {
  int height = 0;
  int width = 0;
  std::vector<float> values;
  std::vector<std::uint8_t> valid;
  std::vector<std::uint8_t> foot;
};

// Vertical image distance from the projection of p to the projection of p
// dropped onto the plane along its normal; clamped at 0.
double pixel_height_of_point(const Camera& camera, const GroundPlane& plane,
                             const Eigen::Vector3d& p);
PixelHeightMap render_pixel_height(const SceneGeometry& scene);

Vertices posed_vertices(const FootMesh& mesh, const SceneMeta& meta);

SceneSample generate_scene(std::uint64_t seed, const SceneConfig& config = {});

// Augmentation.
struct AugmentConfig {
  double scale_min = 0.85;
  double scale_max = 1.2;
  double max_rotation_deg = 15.0;
  double max_shift = 0.08;  // fraction of the image side
  double lowres_prob = 0.3;
  int lowres_max_factor = 3;
  double noise_prob = 0.5;
  double noise_max_std = 0.03;
  double blur_prob = 0.3;
  double blur_max_sigma = 1.0;

  void validate() const;
};

struct AugmentParams {
  double scale = 1.0;
  double rotation_deg = 0.0;  // in-plane; positive turns content clockwise on screen
  double shift_x = 0.0;       // pixels
  double shift_y = 0.0;
  int lowres_factor = 1;
  double noise_std = 0.0;
  double blur_sigma = 0.0;
  std::uint64_t noise_seed = 0;

  bool geometric_identity() const {
    return scale == 1.0 && rotation_deg == 0.0 && shift_x == 0.0 && shift_y == 0.0;
  }
};

AugmentParams sample_augment_params(std::uint64_t seed, const AugmentConfig& config,
                                    int width, int height);
SceneSample apply_augment(const SceneSample& sample, const AugmentParams& params);
// Retries a draw that crops the whole foot away up to 10 times, then
// returns the input unchanged with augment_warning set.
SceneSample augment(const SceneSample& sample, std::uint64_t seed,
                    const AugmentConfig& config = {});

// Shoe images for the style-content branch.
struct ShoeStyleSource {
  enum class Mode { kProcedural, kDirectory };
  Mode mode = Mode::kProcedural;
  std::filesystem::path directory;
  std::uint64_t texture_seed = 0;

  static ShoeStyleSource procedural(std::uint64_t texture_seed = 0);
  // Throws IoError when the directory holds no readable PNG.
  static ShoeStyleSource from_directory(const std::filesystem::path& dir);
  // "procedural" or a directory path.
  static ShoeStyleSource parse(const std::string& spec);

  std::vector<std::filesystem::path> images;  // sorted, directory mode only
};

Image sample_shoe_image(const ShoeStyleSource& source, std::uint64_t seed, int size = 224);

// Records: <dir>/{image.png, mask.png, height.pfm, labels.json}.
void write_record(const SceneSample& sample, const std::filesystem::path& dir);
SceneSample read_record(const std::filesystem::path& dir);
std::string record_name(std::size_t index);  // sample_%06d

class RecordDataset {
 public:
  explicit RecordDataset(const std::filesystem::path& root);
  std::size_t size() const { return dirs_.size(); }
  SceneSample load(std::size_t i) const { return read_record(dirs_.at(i)); }
  const std::vector<std::filesystem::path>& paths() const { return dirs_; }

 private:
  std::vector<std::filesystem::path> dirs_;
};

}  // namespace footcontact
