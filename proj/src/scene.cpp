// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "footcontact/synth_dataset.hpp"
#include "texture.hpp"

namespace footcontact {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument("scene config: " + what);
}

// Möller-Trumbore; returns the ray parameter or +inf.
double intersect(const Eigen::Vector3d& origin, const Eigen::Vector3d& dir,
                 const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                 const Eigen::Vector3d& c, double& bu, double& bv) {
  const Eigen::Vector3d e1 = b - a;
  const Eigen::Vector3d e2 = c - a;
  const Eigen::Vector3d p = dir.cross(e2);
  const double det = e1.dot(p);
  if (std::abs(det) < 1e-14) return kInf;
  const double inv = 1.0 / det;
  const Eigen::Vector3d s = origin - a;
  bu = s.dot(p) * inv;
  if (bu < 0.0 || bu > 1.0) return kInf;
  const Eigen::Vector3d q = s.cross(e1);
  bv = dir.dot(q) * inv;
  if (bv < 0.0 || bu + bv > 1.0) return kInf;
  const double t = e2.dot(q) * inv;
  return t > 1e-9 ? t : kInf;
}

double ground_hit(const GroundPlane& plane, const Eigen::Vector3d& origin,
                  const Eigen::Vector3d& dir) {
  const double along = plane_normal(plane).dot(dir);
  if (along > -1e-12) return kInf;
  const double t = -signed_distance(plane, origin) / along;
  return t > 0 ? t : kInf;
}

struct Raster {
  int height = 0;
  int width = 0;
  std::vector<double> foot_t;
  std::vector<int> face;
  std::vector<double> bary_u, bary_v;
  std::vector<double> ground_t;
  std::vector<Eigen::Vector3d> rays;

  bool is_foot(std::size_t i) const { return face[i] >= 0 && foot_t[i] < ground_t[i]; }
};

Raster rasterize(const SceneGeometry& scene) {
  const Camera& cam = scene.camera;
  Raster r;
  r.height = cam.height;
  r.width = cam.width;
  const std::size_t n = static_cast<std::size_t>(cam.height) * cam.width;
  r.foot_t.assign(n, kInf);
  r.face.assign(n, -1);
  r.bary_u.assign(n, 0);
  r.bary_v.assign(n, 0);
  r.ground_t.assign(n, kInf);
  r.rays.resize(n);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * cam.width + x;
      r.rays[i] = cam.ray(x + 0.5, y + 0.5);
      r.ground_t[i] = ground_hit(scene.plane, cam.position, r.rays[i]);
    }
  }
  for (std::size_t f = 0; f < scene.faces.size(); ++f) {
    const Face& face = scene.faces[f];
    Eigen::Vector3d v[3];
    double umin = kInf, umax = -kInf, vmin = kInf, vmax = -kInf;
    bool behind = false;
    for (int k = 0; k < 3; ++k) {
      v[k] = scene.vertices.row(face[k]).transpose();
      if (cam.to_camera(v[k]).z() <= 1e-6) behind = true;
      const Eigen::Vector2d uv = cam.project(v[k]);
      umin = std::min(umin, uv.x());
      umax = std::max(umax, uv.x());
      vmin = std::min(vmin, uv.y());
      vmax = std::max(vmax, uv.y());
    }
    if (behind) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(umin - 0.5)));
    const int x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(umax - 0.5)));
    const int y0 = std::max(0, static_cast<int>(std::floor(vmin - 0.5)));
    const int y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(vmax - 0.5)));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * cam.width + x;
        double bu = 0, bv = 0;
        const double t = intersect(cam.position, r.rays[i], v[0], v[1], v[2], bu, bv);
        if (t < r.foot_t[i]) {
          r.foot_t[i] = t;
          r.face[i] = static_cast<int>(f);
          r.bary_u[i] = bu;
          r.bary_v[i] = bv;
        }
      }
    }
  }
  return r;
}

PixelHeightMap heights_from_raster(const SceneGeometry& scene, const Raster& r) {
  PixelHeightMap m;
  m.height = r.height;
  m.width = r.width;
  const std::size_t n = r.foot_t.size();
  m.values.assign(n, 0.0f);
  m.valid.assign(n, 0);
  m.foot.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    if (r.is_foot(i)) {
      const Eigen::Vector3d p = scene.camera.position + r.foot_t[i] * r.rays[i];
      m.values[i] = static_cast<float>(pixel_height_of_point(scene.camera, scene.plane, p));
      m.valid[i] = 1;
      m.foot[i] = 1;
    } else if (std::isfinite(r.ground_t[i])) {
      m.valid[i] = 1;
    }
  }
  return m;
}

}  // namespace

Camera Camera::look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                       const Eigen::Vector3d& world_up, double fov_deg, int width,
                       int height) {
  if (width <= 0 || height <= 0) throw InvalidArgument("camera size must be positive");
  if (!(fov_deg > 0 && fov_deg < 180)) throw InvalidArgument("camera fov must be in (0, 180)");
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right_raw = forward.cross(world_up);
  if (right_raw.norm() < 1e-9) throw InvalidArgument("camera looks along the up vector");
  const Eigen::Vector3d right = right_raw.normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Camera cam;
  cam.rotation.row(0) = right.transpose();
  cam.rotation.row(1) = down.transpose();
  cam.rotation.row(2) = forward.transpose();
  cam.position = eye;
  cam.width = width;
  cam.height = height;
  cam.fx = cam.fy = 0.5 * width / std::tan(0.5 * deg2rad(fov_deg));
  cam.cx = 0.5 * width;
  cam.cy = 0.5 * height;
  return cam;
}

Eigen::Vector2d Camera::project(const Eigen::Vector3d& world) const {
  const Eigen::Vector3d c = to_camera(world);
  return {fx * c.x() / c.z() + cx, fy * c.y() / c.z() + cy};
}

Eigen::Vector3d Camera::ray(double u, double v) const {
  const Eigen::Vector3d d((u - cx) / fx, (v - cy) / fy, 1.0);
  return (rotation.transpose() * d).normalized();
}

void SceneConfig::validate() const {
  require(resolution >= 8, "resolution must be at least 8");
  require(tolerance > 0, "tolerance must be positive");
  require(contact_ratio >= 0 && contact_ratio <= 1, "contact_ratio must be in [0, 1]");
  require(hover_min >= 0 && hover_max >= hover_min, "hover range must satisfy 0 <= min <= max");
  require(!hover || *hover >= 0, "forced hover must be nonnegative");
  require(max_slope >= 0 && max_slope < 1, "max_slope must be in [0, 1)");
  require(max_tilt_deg >= 0 && max_tilt_deg < 45, "max_tilt_deg must be in [0, 45)");
  require(camera_distance_min > 0 && camera_distance_max >= camera_distance_min,
          "camera distance range invalid");
  require(elevation_min_deg > 0 && elevation_max_deg >= elevation_min_deg &&
              elevation_max_deg < 90,
          "elevation range must lie in (0, 90)");
  require(fov_deg > 1 && fov_deg < 120, "fov_deg must be in (1, 120)");
}

double pixel_height_of_point(const Camera& camera, const GroundPlane& plane,
                             const Eigen::Vector3d& p) {
  const double d = signed_distance(plane, p);
  const Eigen::Vector3d q = p - d * plane_normal(plane);
  const double h = camera.project(q).y() - camera.project(p).y();
  return std::max(0.0, h);
}

PixelHeightMap render_pixel_height(const SceneGeometry& scene) {
  return heights_from_raster(scene, rasterize(scene));
}

Vertices posed_vertices(const FootMesh& mesh, const SceneMeta& meta) {
  Vertices out(mesh.vertices.rows(), 3);
  for (Eigen::Index i = 0; i < mesh.vertices.rows(); ++i) {
    const Eigen::Vector3d v = mesh.vertices.row(i).transpose();
    out.row(i) = (meta.foot_rotation * v + meta.foot_translation).transpose();
  }
  return out;
}

SceneSample generate_scene(std::uint64_t seed, const SceneConfig& config) {
  config.validate();
  Rng rng(derive_seed(seed, 0x5ce7e));
  const FootMesh mesh = build_canonical_foot_mesh(config.mesh_seed);

  SceneMeta meta;
  meta.seed = seed;
  meta.mesh_seed = config.mesh_seed;
  meta.tolerance = config.tolerance;
  meta.plane.a = uniform(rng, -config.max_slope, config.max_slope);
  meta.plane.b = uniform(rng, -config.max_slope, config.max_slope);
  meta.plane.c = uniform(rng, -0.05, 0.05);
  meta.plane.axes = AxisConvention::y_up();
  const Eigen::Vector3d n = plane_normal(meta.plane);

  const double yaw = uniform(rng, 0, 2 * std::numbers::pi);
  const double tilt = deg2rad(uniform(rng, 0, config.max_tilt_deg));
  const double tilt_dir = uniform(rng, 0, 2 * std::numbers::pi);
  const Eigen::Matrix3d align =
      Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitY(), n).toRotationMatrix();
  const Eigen::Vector3d tilt_axis(std::cos(tilt_dir), 0, std::sin(tilt_dir));
  meta.foot_rotation = align * Eigen::AngleAxisd(tilt, tilt_axis).toRotationMatrix() *
                       Eigen::AngleAxisd(yaw, Eigen::Vector3d::UnitY()).toRotationMatrix();

  const double contact_draw = uniform(rng, 0, 1);
  const double hover_draw = uniform(rng, config.hover_min, config.hover_max);
  meta.hover = config.hover ? *config.hover
                            : (contact_draw < config.contact_ratio ? 0.0 : hover_draw);

  const double g1 = uniform(rng, -0.02, 0.02);
  const double g2 = uniform(rng, -0.02, 0.02);
  const Eigen::Vector3d anchor(g1, meta.plane.a * g1 + meta.plane.b * g2 + meta.plane.c, g2);
  const Eigen::Vector3d center = mesh.vertices.colwise().mean().transpose();
  Eigen::Vector3d translation = anchor - meta.foot_rotation * center;
  meta.foot_translation = translation;
  const Vector d0 = signed_distance(meta.plane, posed_vertices(mesh, meta));
  meta.foot_translation = translation + (meta.hover - d0.minCoeff()) * n;
  const Vertices posed = posed_vertices(mesh, meta);

  const double azimuth = uniform(rng, 0, 2 * std::numbers::pi);
  const double elevation =
      deg2rad(uniform(rng, config.elevation_min_deg, config.elevation_max_deg));
  const double distance = uniform(rng, config.camera_distance_min, config.camera_distance_max);
  const Eigen::Vector3d target = posed.colwise().mean().transpose();
  const Eigen::Vector3d eye =
      target + distance * Eigen::Vector3d(std::cos(elevation) * std::cos(azimuth),
                                          std::sin(elevation),
                                          std::cos(elevation) * std::sin(azimuth));
  meta.camera = Camera::look_at(eye, target, Eigen::Vector3d::UnitY(), config.fov_deg,
                                config.resolution, config.resolution);

  const TextureParams shoe = random_texture(rng, 0.1, 0.95);
  const TextureParams floor = random_texture(rng, 0.2, 0.8);
  const double tile = uniform(rng, 0.03, 0.1);
  const Eigen::Vector3d light =
      Eigen::Vector3d(uniform(rng, -0.5, 0.5), 1.0, uniform(rng, -0.5, 0.5)).normalized();

  SceneSample s;
  s.meta = meta;
  s.ground_normal = meta.camera.rotation * n;
  s.vertex_contact = label_contacts(posed, meta.plane, meta.tolerance);
  const CoarseTargets coarse = coarse_contact_targets(s.vertex_contact, mesh);
  s.joint11 = coarse.joint11;
  s.joint3 = coarse.joint3;

  SceneGeometry geom{posed, mesh.faces, meta.plane, meta.camera};
  const Raster raster = rasterize(geom);
  const PixelHeightMap heights = heights_from_raster(geom, raster);
  s.pixel_height = heights.values;
  s.height_valid = heights.valid;
  s.foot_mask = heights.foot;

  const int res = config.resolution;
  s.image = Image(3, res, res);
  for (int y = 0; y < res; ++y) {
    for (int x = 0; x < res; ++x) {
      const std::size_t i = static_cast<std::size_t>(y) * res + x;
      Eigen::Vector3d color;
      if (raster.is_foot(i)) {
        const Face& f = mesh.faces[raster.face[i]];
        const double bu = raster.bary_u[i];
        const double bv = raster.bary_v[i];
        const Eigen::Vector3d canon =
            (1 - bu - bv) * mesh.vertices.row(f[0]).transpose() +
            bu * mesh.vertices.row(f[1]).transpose() + bv * mesh.vertices.row(f[2]).transpose();
        const Eigen::Vector3d a = posed.row(f[0]).transpose();
        const Eigen::Vector3d b = posed.row(f[1]).transpose();
        const Eigen::Vector3d c = posed.row(f[2]).transpose();
        const Eigen::Vector3d normal = (b - a).cross(c - a).normalized();
        const double shade = 0.35 + 0.65 * std::max(0.0, normal.dot(light));
        color = shade * texture_color(shoe, canon.x() / 0.26, (canon.y() + canon.z()) / 0.26);
      } else if (std::isfinite(raster.ground_t[i])) {
        const Eigen::Vector3d p = meta.camera.position + raster.ground_t[i] * raster.rays[i];
        color = (0.75 + 0.25 * n.dot(light)) * texture_color(floor, p.x() / tile, p.z() / tile);
      } else {
        const double t = static_cast<double>(y) / res;
        color = Eigen::Vector3d(0.55 + 0.2 * t, 0.7 + 0.15 * t, 0.9);
      }
      for (int ch = 0; ch < 3; ++ch) {
        s.image.at(ch, y, x) = static_cast<float>(std::clamp(color(ch), 0.0, 1.0));
      }
    }
  }
  return s;
}

}  // namespace footcontact
