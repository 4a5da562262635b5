// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <limits>

#include "footcontact/evalcli.hpp"

namespace footcontact {

Eigen::Vector3d probability_color(double p) {
  const double t = std::clamp(p, 0.0, 1.0);
  return {t, 0.0, 1.0 - t};
}

namespace {

// Orthographic view: screen x from axis u, screen y (down) from -axis v,
// smaller `depth` is closer to the viewer.
struct View {
  int u, v;
  double v_sign;
  int depth_axis;
  double depth_sign;
};

void render_view(const Vector& probs, const FootMesh& mesh, const View& view, Image& img,
                 int x_offset, int size) {
  const Vertices& V = mesh.vertices;
  const double lo_u = V.col(view.u).minCoeff(), hi_u = V.col(view.u).maxCoeff();
  const double lo_v = (view.v_sign * V.col(view.v)).minCoeff();
  const double hi_v = (view.v_sign * V.col(view.v)).maxCoeff();
  const double extent = std::max(hi_u - lo_u, hi_v - lo_v);
  const double scale = 0.9 * size / extent;
  const double cu = 0.5 * (lo_u + hi_u), cv = 0.5 * (lo_v + hi_v);

  std::vector<Eigen::Vector3d> screen(static_cast<std::size_t>(V.rows()));
  for (Eigen::Index i = 0; i < V.rows(); ++i) {
    screen[i] = {0.5 * size + scale * (V(i, view.u) - cu),
                 0.5 * size - scale * (view.v_sign * V(i, view.v) - cv),
                 view.depth_sign * V(i, view.depth_axis)};
  }
  std::vector<double> zbuf(static_cast<std::size_t>(size) * size,
                           std::numeric_limits<double>::infinity());
  for (const Face& f : mesh.faces) {
    const Eigen::Vector3d& a = screen[f[0]];
    const Eigen::Vector3d& b = screen[f[1]];
    const Eigen::Vector3d& c = screen[f[2]];
    const double area = (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
    if (std::abs(area) < 1e-12) continue;
    const int x0 = std::max(0, static_cast<int>(std::floor(std::min({a.x(), b.x(), c.x()}))));
    const int x1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.x(), b.x(), c.x()}))));
    const int y0 = std::max(0, static_cast<int>(std::floor(std::min({a.y(), b.y(), c.y()}))));
    const int y1 = std::min(size - 1, static_cast<int>(std::ceil(std::max({a.y(), b.y(), c.y()}))));
    for (int y = y0; y <= y1; ++y) {
      for (int x = x0; x <= x1; ++x) {
        const double px = x + 0.5, py = y + 0.5;
        const double w0 = ((b.x() - px) * (c.y() - py) - (b.y() - py) * (c.x() - px)) / area;
        const double w1 = ((c.x() - px) * (a.y() - py) - (c.y() - py) * (a.x() - px)) / area;
        const double w2 = 1.0 - w0 - w1;
        if (w0 < 0 || w1 < 0 || w2 < 0) continue;
        const double z = w0 * a.z() + w1 * b.z() + w2 * c.z();
        double& zb = zbuf[static_cast<std::size_t>(y) * size + x];
        if (z >= zb) continue;
        zb = z;
        const double p = w0 * probs(f[0]) + w1 * probs(f[1]) + w2 * probs(f[2]);
        const Eigen::Vector3d col = probability_color(p);
        for (int ch = 0; ch < 3; ++ch) img.at(ch, y, x_offset + x) = static_cast<float>(col(ch));
      }
    }
  }
}

}  // namespace

void emit_plot(const Vector& probs, const FootMesh& mesh, const std::filesystem::path& path,
               int view_size) {
  validate_mesh(mesh);
  if (probs.size() != mesh.vertex_count()) {
    throw InvalidArgument("plot: " + std::to_string(probs.size()) + " probabilities for a mesh of " +
                          std::to_string(mesh.vertex_count()) + " vertices");
  }
  if (view_size < 16) throw InvalidArgument("plot: view size must be at least 16");
  Image img(3, view_size, 2 * view_size, 1.0f);
  // Lateral side (viewer on -z) and sole (viewer below).
  render_view(probs, mesh, {0, 1, 1.0, 2, 1.0}, img, 0, view_size);
  render_view(probs, mesh, {0, 2, 1.0, 1, 1.0}, img, view_size, view_size);
  write_png(img, path);
}

}  // namespace footcontact
