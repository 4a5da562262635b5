// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

#include "footcontact/common.hpp"
#include "footcontact/foot_mesh.hpp"

namespace footcontact {

using Points = Eigen::Matrix<double, Eigen::Dynamic, 3>;

// Which coordinate is height and which two span the ground. With
// negative_height set, smaller height values are physically higher.
struct AxisConvention {
  int height_axis = 1;
  int ground_axis1 = 0;
  int ground_axis2 = 2;
  bool negative_height = false;

  static AxisConvention y_up() { return {1, 0, 2, false}; }
  static AxisConvention z_up() { return {2, 0, 1, false}; }
  double up_sign() const { return negative_height ? -1.0 : 1.0; }
  void validate() const;
};

// h = a * g1 + b * g2 + c in the coordinates named by `axes`.
struct GroundPlane {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  AxisConvention axes;
  double residual = 0.0;  // sum of squared height residuals of the fit
};

struct RansacParams {
  int iterations = 100;
  double inlier_distance = 0.02;
  double percentile_p = 10.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Dataset contact tolerances in meters.
namespace tolerance {
inline constexpr double kMoyo = 0.01;
inline constexpr double kMotionPro = 0.02;
inline constexpr double kProx = 0.03;
inline constexpr double kEgoBody = 0.03;
inline constexpr double kBehave = 0.05;
inline constexpr double kInterCap = 0.05;
// Looks up a preset by dataset name (case-insensitive); throws if unknown.
double for_dataset(const std::string& name);
}  // namespace tolerance

// Height-axis convention of a known capture dataset (case-insensitive).
AxisConvention dataset_axis_convention(const std::string& name);

GroundPlane fit_plane_least_squares(const Points& points, const AxisConvention& axes);
GroundPlane fit_plane_ransac(const Points& points, const RansacParams& params,
                             const AxisConvention& axes);

// Unit normal pointing physically up.
Eigen::Vector3d plane_normal(const GroundPlane& plane);
// Perpendicular distance, positive above the ground.
Vector signed_distance(const GroundPlane& plane, const Points& points);
double signed_distance(const GroundPlane& plane, const Eigen::Vector3d& point);

// 1 iff |signed distance| <= tolerance.
std::vector<int> label_contacts(const Points& vertices, const GroundPlane& plane,
                                double tolerance);

// Candidate ground points for captures without a scene mesh: the single
// lowest vertex of each frame's mesh.
Points lowest_vertex_per_frame(const std::vector<Points>& frames,
                               const AxisConvention& axes);

struct PlaneFixture {
  std::string dataset;
  std::string sequence;
  GroundPlane plane;
};

std::vector<PlaneFixture> load_plane_fixtures(const std::filesystem::path& json_path);
// resources/ground_planes.json shipped with the build.
std::filesystem::path default_plane_fixture_path();

}  // namespace footcontact
