// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/synth_dataset.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace footcontact {
namespace {

namespace fs = std::filesystem;

SceneConfig small(int res = 64) {
  SceneConfig c;
  c.resolution = res;
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("footcontact_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::uint64_t checksum(const Image& img) {
  std::uint64_t h = 1469598103934665603ULL;
  for (float v : img.data) h = (h ^ std::bit_cast<std::uint32_t>(v)) * 1099511628211ULL;
  return h;
}

int count(const std::vector<std::uint8_t>& v) {
  return static_cast<int>(std::count(v.begin(), v.end(), 1));
}

TEST(Camera, ProjectsItsOwnRays) {
  const Camera cam = Camera::look_at({0.3, 0.5, 0.7}, {0, 0, 0}, Eigen::Vector3d::UnitY(), 35, 64, 48);
  const Eigen::Vector3d p = cam.position + 2.0 * cam.ray(10.5, 30.5);
  const Eigen::Vector2d uv = cam.project(p);
  EXPECT_NEAR(uv.x(), 10.5, 1e-9);
  EXPECT_NEAR(uv.y(), 30.5, 1e-9);
  // Image rows grow downward in the world.
  EXPECT_LT(cam.project({0, 0.1, 0}).y(), cam.project({0, -0.1, 0}).y());
}

TEST(Scene, DeterministicPerSeed) {
  const SceneSample a = generate_scene(42, small());
  const SceneSample b = generate_scene(42, small());
  EXPECT_EQ(a.image.data, b.image.data);
  EXPECT_EQ(a.foot_mask, b.foot_mask);
  EXPECT_EQ(a.pixel_height, b.pixel_height);
  EXPECT_EQ(a.vertex_contact, b.vertex_contact);
  EXPECT_NE(checksum(a.image), checksum(generate_scene(43, small()).image));
}

TEST(Scene, InvariantsHoldAcrossSeeds) {
  const FootMesh mesh = build_canonical_foot_mesh(0);
  int contact_scenes = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const SceneSample s = generate_scene(seed, small());
    ASSERT_EQ(s.vertex_contact.size(), 265u);
    EXPECT_NEAR(s.ground_normal.norm(), 1.0, 1e-6);
    EXPECT_GT(count(s.foot_mask), 50) << seed;
    for (std::size_t i = 0; i < s.foot_mask.size(); ++i) {
      if (s.foot_mask[i]) EXPECT_TRUE(s.height_valid[i]);
      if (s.height_valid[i]) EXPECT_GE(s.pixel_height[i], 0.0f);
      if (s.height_valid[i] && !s.foot_mask[i]) EXPECT_EQ(s.pixel_height[i], 0.0f);
    }
    for (float v : s.image.data) ASSERT_TRUE(v >= 0.0f && v <= 1.0f);
    // Labels reproduce from the stored geometry.
    const Vertices posed = posed_vertices(mesh, s.meta);
    EXPECT_EQ(label_contacts(posed, s.meta.plane, s.meta.tolerance), s.vertex_contact);
    const Eigen::Vector3d n = s.meta.camera.rotation * plane_normal(s.meta.plane);
    EXPECT_LT((n - s.ground_normal).norm(), 1e-6);
    const auto coarse = coarse_contact_targets(s.vertex_contact, mesh);
    EXPECT_EQ(coarse.joint11, s.joint11);
    EXPECT_EQ(coarse.joint3, s.joint3);
    contact_scenes += std::count(s.vertex_contact.begin(), s.vertex_contact.end(), 1) > 0;
  }
  EXPECT_GE(contact_scenes, 8);
  EXPECT_LE(contact_scenes, 22);
}

TEST(Scene, RestingFootOnFlatGroundContactsWithSole) {
  SceneConfig c = small();
  c.hover = 0.0;
  c.max_slope = 0.0;
  c.max_tilt_deg = 0.0;
  const SceneSample s = generate_scene(5, c);
  const FootMesh mesh = build_canonical_foot_mesh(0);
  const Vertices posed = posed_vertices(mesh, s.meta);
  const Vector d = signed_distance(s.meta.plane, posed);
  int bottom_contacts = 0;
  for (int i = 0; i < 265; ++i) {
    EXPECT_EQ(s.vertex_contact[i], std::abs(d(i)) <= c.tolerance ? 1 : 0);
    if (mesh.part_labels[i] == static_cast<int>(FootPart::kBottom)) bottom_contacts += s.vertex_contact[i];
  }
  EXPECT_GT(bottom_contacts, 0);
  EXPECT_NEAR(d.minCoeff(), 0.0, 1e-12);
}

TEST(Scene, HighFootHasNoContact) {
  SceneConfig c = small();
  c.hover = 1.0;
  c.camera_distance_min = c.camera_distance_max = 1.5;
  const SceneSample s = generate_scene(3, c);
  EXPECT_EQ(std::count(s.vertex_contact.begin(), s.vertex_contact.end(), 1), 0);
}

TEST(Scene, InvalidConfigRejected) {
  SceneConfig c;
  c.resolution = 0;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
  c = SceneConfig{};
  c.tolerance = -1;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
  c = SceneConfig{};
  c.contact_ratio = 1.5;
  EXPECT_THROW(generate_scene(0, c), InvalidArgument);
}

TEST(PixelHeight, PointOnGroundIsZero) {
  const SceneSample s = generate_scene(1, small());
  const FootMesh mesh = build_canonical_foot_mesh(0);
  const Vertices posed = posed_vertices(mesh, s.meta);
  const Eigen::Vector3d foot = posed.row(0).transpose();
  const Eigen::Vector3d on_plane = foot - signed_distance(s.meta.plane, foot) * plane_normal(s.meta.plane);
  EXPECT_NEAR(pixel_height_of_point(s.meta.camera, s.meta.plane, on_plane), 0.0, 1e-9);
}

TEST(PixelHeight, ContactingSolePixelsAreNearZero) {
  // Nearly level camera so the sole edge touching the ground is visible.
  const FootMesh mesh = build_canonical_foot_mesh(0);
  for (double azimuth : {0.3, 1.2, 2.5, 4.0}) {
    SceneGeometry g;
    g.vertices = mesh.vertices;
    g.faces = mesh.faces;
    const Eigen::Vector3d target(0.13, 0.03, 0.0);
    const Eigen::Vector3d eye =
        target + 0.6 * Eigen::Vector3d(std::cos(azimuth), 0.05, std::sin(azimuth));
    g.camera = Camera::look_at(eye, target, Eigen::Vector3d::UnitY(), 40, 128, 128);
    const PixelHeightMap m = render_pixel_height(g);
    float lo = 1e9f;
    for (std::size_t i = 0; i < m.foot.size(); ++i) {
      if (m.foot[i]) lo = std::min(lo, m.values[i]);
    }
    EXPECT_LE(lo, 0.5f) << azimuth;
  }
}

TEST(PixelHeight, FarLevelCameraMatchesPixelsPerMeter) {
  // Level camera, flat ground: dropping a point by k changes its row by f k / Z.
  const FootMesh mesh = build_canonical_foot_mesh(0);
  const double k = 0.05;
  const double distance = 40.0;
  Vertices posed = mesh.vertices;
  for (Eigen::Index i = 0; i < posed.rows(); ++i) posed(i, 1) += k;
  SceneGeometry g;
  g.vertices = posed;
  g.faces = mesh.faces;
  g.plane = GroundPlane{};
  const Eigen::Vector3d target(0.13, 0.06, 0.0);
  g.camera = Camera::look_at(target + Eigen::Vector3d(0, 0, distance), target,
                             Eigen::Vector3d::UnitY(), 0.5, 96, 96);
  const PixelHeightMap m = render_pixel_height(g);
  const double ppm = g.camera.fy / distance;
  float lo = 1e9f;
  for (std::size_t i = 0; i < m.foot.size(); ++i) {
    if (m.foot[i]) lo = std::min(lo, m.values[i]);
  }
  ASSERT_LT(lo, 1e9f);
  EXPECT_NEAR(lo, k * ppm, 0.02 * k * ppm + 1.0);
}

TEST(PixelHeight, DoublingResolutionDoublesHeights) {
  const SceneSample lo = generate_scene(9, small(64));
  const SceneSample hi = generate_scene(9, small(128));
  const FootMesh mesh = build_canonical_foot_mesh(0);
  const Vertices posed = posed_vertices(mesh, lo.meta);
  for (int i = 0; i < 265; i += 13) {
    const Eigen::Vector3d p = posed.row(i).transpose();
    const double a = pixel_height_of_point(lo.meta.camera, lo.meta.plane, p);
    const double b = pixel_height_of_point(hi.meta.camera, hi.meta.plane, p);
    EXPECT_NEAR(b, 2 * a, 1e-9 * (1 + a));
  }
  auto max_of = [](const SceneSample& s) {
    float m = 0;
    for (std::size_t i = 0; i < s.pixel_height.size(); ++i)
      if (s.foot_mask[i]) m = std::max(m, s.pixel_height[i]);
    return m;
  };
  EXPECT_NEAR(max_of(hi), 2 * max_of(lo), 0.05 * 2 * max_of(lo) + 1.0);
}

TEST(Augment, IdentityLeavesSampleUnchanged) {
  const SceneSample s = generate_scene(2, small());
  const SceneSample a = apply_augment(s, AugmentParams{});
  EXPECT_EQ(a.image.data, s.image.data);
  EXPECT_EQ(a.foot_mask, s.foot_mask);
  EXPECT_EQ(a.pixel_height, s.pixel_height);
  EXPECT_EQ(a.ground_normal, s.ground_normal);
}

TEST(Augment, NoiseOnlyKeepsGroundTruthBitIdentical) {
  const SceneSample s = generate_scene(2, small());
  AugmentParams p;
  p.noise_std = 0.05;
  p.blur_sigma = 0.8;
  p.lowres_factor = 2;
  const SceneSample a = apply_augment(s, p);
  EXPECT_NE(a.image.data, s.image.data);
  EXPECT_EQ(a.foot_mask, s.foot_mask);
  EXPECT_EQ(a.pixel_height, s.pixel_height);
  EXPECT_EQ(a.height_valid, s.height_valid);
  EXPECT_EQ(a.ground_normal, s.ground_normal);
  EXPECT_EQ(a.vertex_contact, s.vertex_contact);
}

TEST(Augment, ScalingByTwoDoublesHeights) {
  const SceneSample s = generate_scene(4, small());
  AugmentParams p;
  p.scale = 2.0;
  const SceneSample a = apply_augment(s, p);
  // Output pixel (x, y) samples source (x/2 + W/4, y/2 + H/4).
  const int w = s.width();
  int checked = 0;
  for (int y = 0; y < w; ++y) {
    for (int x = 0; x < w; ++x) {
      const int sx = static_cast<int>(std::floor((x + 0.5 - w / 2.0) / 2 + w / 2.0));
      const int sy = static_cast<int>(std::floor((y + 0.5 - w / 2.0) / 2 + w / 2.0));
      const std::size_t src = static_cast<std::size_t>(sy) * w + sx;
      const std::size_t dst = static_cast<std::size_t>(y) * w + x;
      EXPECT_EQ(a.foot_mask[dst], s.foot_mask[src]);
      EXPECT_EQ(a.pixel_height[dst], 2.0f * s.pixel_height[src]);
      checked += s.foot_mask[src];
    }
  }
  EXPECT_GT(checked, 0);
}

TEST(Augment, RotationTurnsNormalAndKeepsLabels) {
  const SceneSample s = generate_scene(6, small());
  AugmentParams p;
  p.rotation_deg = 15;
  const SceneSample a = apply_augment(s, p);
  EXPECT_NEAR(a.ground_normal.norm(), 1.0, 1e-12);
  EXPECT_EQ(a.ground_normal.z(), s.ground_normal.z());
  const double th = 15 * std::numbers::pi / 180;
  EXPECT_NEAR(a.ground_normal.x(), std::cos(th) * s.ground_normal.x() - std::sin(th) * s.ground_normal.y(), 1e-12);
  EXPECT_EQ(a.vertex_contact, s.vertex_contact);
  EXPECT_EQ(a.joint3, s.joint3);
}

TEST(Augment, SeededAndBounded) {
  const SceneSample s = generate_scene(7, small());
  const SceneSample a = augment(s, 11);
  const SceneSample b = augment(s, 11);
  EXPECT_EQ(a.image.data, b.image.data);
  EXPECT_FALSE(a.augment_warning);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const AugmentParams p = sample_augment_params(seed, AugmentConfig{}, 64, 64);
    EXPECT_LE(std::abs(p.rotation_deg), 15.0);
  }
}

TEST(Augment, HopelessCropFallsBackWithWarning) {
  const SceneSample s = generate_scene(7, small());
  AugmentConfig c;
  c.scale_min = c.scale_max = 40.0;  // zooms far into the (foot-free) corner
  c.max_shift = 0.45;
  c.max_rotation_deg = 0;
  SceneSample corner = s;
  // Leave only a single foot pixel so every zoomed crop misses it.
  std::fill(corner.foot_mask.begin(), corner.foot_mask.end(), 0);
  corner.foot_mask[0] = 1;
  const SceneSample a = augment(corner, 3, c);
  EXPECT_TRUE(a.augment_warning);
  EXPECT_EQ(a.image.data, corner.image.data);
}

TEST(Records, RoundTripIsExactForGroundTruth) {
  const fs::path root = scratch("records_rt");
  const SceneSample s = generate_scene(0, small());
  write_record(s, root / record_name(0));
  const SceneSample r = read_record(root / record_name(0));
  EXPECT_EQ(r.foot_mask, s.foot_mask);
  EXPECT_EQ(r.pixel_height, s.pixel_height);
  EXPECT_EQ(r.height_valid, s.height_valid);
  EXPECT_EQ(r.ground_normal, s.ground_normal);
  EXPECT_EQ(r.vertex_contact, s.vertex_contact);
  EXPECT_EQ(r.joint11, s.joint11);
  EXPECT_EQ(r.joint3, s.joint3);
  EXPECT_EQ(r.meta.foot_rotation, s.meta.foot_rotation);
  EXPECT_EQ(r.meta.foot_translation, s.meta.foot_translation);
  EXPECT_EQ(r.meta.plane.a, s.meta.plane.a);
  EXPECT_EQ(r.meta.camera.rotation, s.meta.camera.rotation);
  ASSERT_EQ(r.image.data.size(), s.image.data.size());
  for (std::size_t i = 0; i < s.image.data.size(); ++i) {
    ASSERT_LE(std::abs(r.image.data[i] - s.image.data[i]), 1.0f / 255.0f);
  }
  fs::remove_all(root);
}

TEST(Records, TruncatedHeightFileIsNamed) {
  const fs::path root = scratch("records_trunc");
  write_record(generate_scene(0, small()), root / "sample_000000");
  const fs::path pfm = root / "sample_000000" / "height.pfm";
  fs::resize_file(pfm, fs::file_size(pfm) / 2);
  try {
    read_record(root / "sample_000000");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("height.pfm"), std::string::npos) << e.what();
  }
  fs::remove(root / "sample_000000" / "labels.json");
  EXPECT_THROW(read_record(root / "sample_000000"), Error);
  fs::remove_all(root);
}

TEST(Records, DatasetIteratesInStableOrder) {
  const fs::path root = scratch("records_iter");
  for (int i = 7; i >= 0; --i) {
    SceneSample s = generate_scene(100 + i, small(32));
    write_record(s, root / record_name(i));
  }
  const RecordDataset ds(root);
  ASSERT_EQ(ds.size(), 8u);
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(ds.paths()[i].filename().string(), record_name(i));
    EXPECT_EQ(ds.load(i).meta.seed, 100 + i);
  }
  fs::remove_all(root);
}

TEST(ShoeImages, ProceduralIsSeededAndVaried) {
  const ShoeStyleSource src = ShoeStyleSource::procedural();
  const Image a = sample_shoe_image(src, 5);
  EXPECT_EQ(a.channels, 3);
  EXPECT_EQ(a.height, 224);
  EXPECT_EQ(a.width, 224);
  EXPECT_EQ(a.data, sample_shoe_image(src, 5).data);
  std::set<std::uint64_t> sums;
  for (std::uint64_t seed = 0; seed < 100; ++seed) sums.insert(checksum(sample_shoe_image(src, seed, 32)));
  EXPECT_EQ(sums.size(), 100u);
}

TEST(ShoeImages, DirectoryWithOneImageAlwaysReturnsIt) {
  const fs::path dir = scratch("shoes");
  Image img(3, 40, 60, 0.25f);
  for (int x = 0; x < 60; ++x) img.at(0, 10, x) = 1.0f;
  write_png(img, dir / "only.png");
  std::ofstream(dir / "notes.txt") << "not an image";
  const ShoeStyleSource src = ShoeStyleSource::from_directory(dir);
  const Image a = sample_shoe_image(src, 1, 64);
  for (std::uint64_t s = 2; s < 6; ++s) EXPECT_EQ(sample_shoe_image(src, s, 64).data, a.data);
  EXPECT_EQ(a.height, 64);
  fs::remove_all(dir);
}

TEST(ShoeImages, UnreadableDirectoryRejected) {
  EXPECT_THROW(ShoeStyleSource::from_directory("/nonexistent/shoes"), IoError);
  const fs::path dir = scratch("shoes_empty");
  std::ofstream(dir / "broken.png") << "garbage";
  EXPECT_THROW(ShoeStyleSource::from_directory(dir), IoError);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace footcontact
