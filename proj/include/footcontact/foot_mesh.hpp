// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "footcontact/autograd.hpp"

namespace footcontact {

inline constexpr int kNumFootVertices = 265;
inline constexpr int kNumFootParts = 11;
inline constexpr int kNumKeypoints = 3;

// Part ids; the numeric order is the joint11 row order.
enum class FootPart : int {
  kBigToe = 0,
  kSecondToe,
  kMiddleToe,
  kFourthToe,
  kSmallToe,
  kHeel,
  kFront,
  kBottom,
  kLeft,
  kRight,
  kBack,
};

const char* part_name(FootPart part);

using Vertices = Eigen::Matrix<double, Eigen::Dynamic, 3>;
using Face = std::array<int, 3>;

// Canonical foot surface. Canonical frame: x points from heel to toes,
// y is up with the sole at y = 0, z points to the medial (big toe) side.
// Units are meters.
struct FootMesh {
  Vertices vertices;
  std::vector<Face> faces;
  std::vector<int> part_labels;

  int vertex_count() const { return static_cast<int>(vertices.rows()); }
  std::vector<int> part_members(FootPart part) const;
};

// Throws InvalidArgument naming the first violated invariant.
void validate_mesh(const FootMesh& mesh);

FootMesh build_canonical_foot_mesh(std::uint64_t seed);

enum class RegressorLevel { kVertex, kJoint11, kJoint3 };

const char* level_name(RegressorLevel level);
// Accepts "vertex", "joint11", "joint3".
RegressorLevel parse_level(std::string_view name);

struct RegressorMatrix {
  RegressorLevel level = RegressorLevel::kVertex;
  Matrix weights;  // rows x V, row-stochastic
};

RegressorMatrix build_regressor(const FootMesh& mesh, RegressorLevel level);
RegressorMatrix build_regressor(const FootMesh& mesh, std::string_view level);
// {vertex, joint11, joint3} in that order.
std::vector<RegressorMatrix> build_all_regressors(const FootMesh& mesh);

// Applies each regressor to the vertex values (raw logits during training).
std::vector<Vector> project_levels(const Vector& vertex_values,
                                   const std::vector<RegressorMatrix>& regressors);

struct CoarseTargets {
  std::vector<int> joint11;
  std::vector<int> joint3;
};

// A joint is in contact iff any vertex of its part is in contact.
CoarseTargets coarse_contact_targets(const std::vector<int>& vertex_contact,
                                     const FootMesh& mesh);

// Joint11 rows feeding the three keypoints (big toe, small toe, heel).
inline constexpr std::array<FootPart, kNumKeypoints> kKeypointParts{
    FootPart::kBigToe, FootPart::kSmallToe, FootPart::kHeel};

// OBJ with a sidecar "<stem>.parts.json" holding {"part_labels": [...]}.
void write_mesh_obj(const FootMesh& mesh, const std::filesystem::path& obj_path);
FootMesh read_mesh_obj(const std::filesystem::path& obj_path);
std::filesystem::path part_labels_path(const std::filesystem::path& obj_path);
// Reads vertex positions only (v lines) from an OBJ file.
Vertices read_obj_vertices(const std::filesystem::path& obj_path);

void write_regressor_csv(const RegressorMatrix& reg, const std::filesystem::path& path);

}  // namespace footcontact
