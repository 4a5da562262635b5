// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/ground_geometry.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <numeric>

#ifndef FOOTCONTACT_RESOURCE_DIR
#define FOOTCONTACT_RESOURCE_DIR "resources"
#endif

namespace footcontact {

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return s;
}

double height_of(const GroundPlane& plane, double g1, double g2) {
  return plane.a * g1 + plane.b * g2 + plane.c;
}

}  // namespace

void AxisConvention::validate() const {
  const bool in_range = height_axis >= 0 && height_axis < 3 && ground_axis1 >= 0 &&
                        ground_axis1 < 3 && ground_axis2 >= 0 && ground_axis2 < 3;
  if (!in_range || height_axis == ground_axis1 || height_axis == ground_axis2 ||
      ground_axis1 == ground_axis2) {
    throw InvalidArgument("axis convention must name three distinct axes");
  }
}

void RansacParams::validate() const {
  if (iterations < 1) throw InvalidArgument("ransac iterations must be >= 1");
  if (!(inlier_distance > 0)) throw InvalidArgument("ransac inlier_distance must be > 0");
  if (!(percentile_p > 0 && percentile_p <= 100)) {
    throw InvalidArgument("ransac percentile_p must be in (0, 100]");
  }
}

double tolerance::for_dataset(const std::string& name) {
  const std::string n = lower(name);
  if (n == "moyo") return kMoyo;
  if (n == "motionpro") return kMotionPro;
  if (n == "prox") return kProx;
  if (n == "egobody") return kEgoBody;
  if (n == "behave") return kBehave;
  if (n == "intercap") return kInterCap;
  throw InvalidArgument("no contact tolerance preset for dataset '" + name + "'");
}

AxisConvention dataset_axis_convention(const std::string& name) {
  const std::string n = lower(name);
  if (n == "prox" || n == "moyo") return AxisConvention::z_up();
  AxisConvention y = AxisConvention::y_up();
  if (n == "behave" || n == "intercap" || n == "rich" || n == "mmvp") {
    y.negative_height = true;
    return y;
  }
  if (n == "egobody" || n == "hi4d" || n == "motionpro") return y;
  throw InvalidArgument("unknown dataset '" + name + "'");
}

GroundPlane fit_plane_least_squares(const Points& points, const AxisConvention& axes) {
  axes.validate();
  const Eigen::Index n = points.rows();
  if (n < 3) {
    throw DegenerateInput("plane fit needs at least 3 points, got " + std::to_string(n));
  }
  Eigen::MatrixX3d design(n, 3);
  design.col(0) = points.col(axes.ground_axis1);
  design.col(1) = points.col(axes.ground_axis2);
  design.col(2).setOnes();
  const Vector h = points.col(axes.height_axis);

  Eigen::ColPivHouseholderQR<Eigen::MatrixX3d> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    throw DegenerateInput("plane fit design matrix is rank deficient (points collinear "
                          "in the ground axes)");
  }
  const Eigen::Vector3d coef = qr.solve(h);
  GroundPlane plane{coef(0), coef(1), coef(2), axes, 0.0};
  if (!std::isfinite(plane.a) || !std::isfinite(plane.b) || !std::isfinite(plane.c)) {
    throw DegenerateInput("plane fit produced non-finite coefficients");
  }
  plane.residual = (design * coef - h).squaredNorm();
  return plane;
}

Eigen::Vector3d plane_normal(const GroundPlane& plane) {
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n(plane.axes.height_axis) = 1.0;
  n(plane.axes.ground_axis1) = -plane.a;
  n(plane.axes.ground_axis2) = -plane.b;
  return plane.axes.up_sign() * n.normalized();
}

double signed_distance(const GroundPlane& plane, const Eigen::Vector3d& p) {
  const auto& ax = plane.axes;
  const double raw = p(ax.height_axis) - height_of(plane, p(ax.ground_axis1), p(ax.ground_axis2));
  return ax.up_sign() * raw / std::sqrt(1.0 + plane.a * plane.a + plane.b * plane.b);
}

Vector signed_distance(const GroundPlane& plane, const Points& points) {
  Vector d(points.rows());
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    d(i) = signed_distance(plane, Eigen::Vector3d(points.row(i).transpose()));
  }
  return d;
}

std::vector<int> label_contacts(const Points& vertices, const GroundPlane& plane,
                                double tol) {
  if (!(tol > 0)) throw InvalidArgument("contact tolerance must be positive");
  const Vector d = signed_distance(plane, vertices);
  std::vector<int> labels(static_cast<std::size_t>(d.size()));
  for (Eigen::Index i = 0; i < d.size(); ++i) labels[i] = std::abs(d(i)) <= tol ? 1 : 0;
  return labels;
}

GroundPlane fit_plane_ransac(const Points& points, const RansacParams& params,
                             const AxisConvention& axes) {
  params.validate();
  axes.validate();

  // Lowest p% of points by physical height.
  const Eigen::Index n = points.rows();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const double up = axes.up_sign();
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index l, Eigen::Index r) {
    return up * points(l, axes.height_axis) < up * points(r, axes.height_axis);
  });
  const auto keep = static_cast<Eigen::Index>(
      std::ceil(params.percentile_p / 100.0 * static_cast<double>(n) - 1e-9));
  if (keep < 3) {
    throw DegenerateInput("ransac needs at least 3 candidate points after percentile "
                          "filtering, got " + std::to_string(keep));
  }
  Points cand(keep, 3);
  for (Eigen::Index i = 0; i < keep; ++i) cand.row(i) = points.row(order[i]);

  Rng rng(derive_seed(params.seed, 0x5a5a));
  std::uniform_int_distribution<Eigen::Index> pick(0, keep - 1);

  long best_count = -1;
  double best_area = -1.0;
  GroundPlane best;
  bool found = false;
  for (int it = 0; it < params.iterations; ++it) {
    Eigen::Index i0 = pick(rng);
    Eigen::Index i1 = pick(rng);
    Eigen::Index i2 = pick(rng);
    if (i0 == i1 || i1 == i2 || i0 == i2) continue;
    Eigen::Matrix3d m;
    Eigen::Vector3d h;
    for (int r = 0; r < 3; ++r) {
      const Eigen::Index idx = r == 0 ? i0 : (r == 1 ? i1 : i2);
      m(r, 0) = cand(idx, axes.ground_axis1);
      m(r, 1) = cand(idx, axes.ground_axis2);
      m(r, 2) = 1.0;
      h(r) = cand(idx, axes.height_axis);
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(m);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) continue;
    const Eigen::Vector3d coef = lu.solve(h);
    GroundPlane hyp{coef(0), coef(1), coef(2), axes, 0.0};
    if (!std::isfinite(hyp.a) || !std::isfinite(hyp.b) || !std::isfinite(hyp.c)) continue;

    long count = 0;
    double lo1 = 1e300, hi1 = -1e300, lo2 = 1e300, hi2 = -1e300;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (std::abs(signed_distance(hyp, Eigen::Vector3d(points.row(i).transpose()))) <=
          params.inlier_distance) {
        ++count;
        lo1 = std::min(lo1, points(i, axes.ground_axis1));
        hi1 = std::max(hi1, points(i, axes.ground_axis1));
        lo2 = std::min(lo2, points(i, axes.ground_axis2));
        hi2 = std::max(hi2, points(i, axes.ground_axis2));
      }
    }
    const double area = count > 0 ? (hi1 - lo1) * (hi2 - lo2) : 0.0;
    if (count > best_count || (count == best_count && area > best_area)) {
      best_count = count;
      best_area = area;
      best = hyp;
      found = true;
    }
  }
  if (!found) throw FittingFailed("ransac: every sampled hypothesis was degenerate");

  std::vector<Eigen::Index> inliers;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(signed_distance(best, Eigen::Vector3d(points.row(i).transpose()))) <=
        params.inlier_distance) {
      inliers.push_back(i);
    }
  }
  Points in(static_cast<Eigen::Index>(inliers.size()), 3);
  for (std::size_t i = 0; i < inliers.size(); ++i) {
    in.row(static_cast<Eigen::Index>(i)) = points.row(inliers[i]);
  }
  try {
    return fit_plane_least_squares(in, axes);
  } catch (const DegenerateInput&) {
    return best;
  }
}

Points lowest_vertex_per_frame(const std::vector<Points>& frames,
                               const AxisConvention& axes) {
  axes.validate();
  Points out(static_cast<Eigen::Index>(frames.size()), 3);
  const double up = axes.up_sign();
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Points& pts = frames[f];
    if (pts.rows() == 0) throw InvalidArgument("frame " + std::to_string(f) + " has no vertices");
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < pts.rows(); ++i) {
      if (up * pts(i, axes.height_axis) < up * pts(best, axes.height_axis)) best = i;
    }
    out.row(static_cast<Eigen::Index>(f)) = pts.row(best);
  }
  return out;
}

std::filesystem::path default_plane_fixture_path() {
  return std::filesystem::path(FOOTCONTACT_RESOURCE_DIR) / "ground_planes.json";
}

std::vector<PlaneFixture> load_plane_fixtures(const std::filesystem::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot read plane fixtures " + json_path.string());
  std::vector<PlaneFixture> out;
  try {
    const nlohmann::json j = nlohmann::json::parse(in);
    for (const auto& ds : j.at("datasets")) {
      AxisConvention axes;
      axes.height_axis = ds.at("height_axis").get<int>();
      axes.ground_axis1 = ds.at("ground_axes").at(0).get<int>();
      axes.ground_axis2 = ds.at("ground_axes").at(1).get<int>();
      axes.negative_height = ds.at("negative_height").get<bool>();
      axes.validate();
      for (const auto& seq : ds.at("sequences")) {
        PlaneFixture fx;
        fx.dataset = ds.at("name").get<std::string>();
        fx.sequence = seq.at("name").get<std::string>();
        fx.plane.a = seq.at("a").get<double>();
        fx.plane.b = seq.at("b").get<double>();
        fx.plane.c = seq.at("c").get<double>();
        fx.plane.axes = axes;
        out.push_back(std::move(fx));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(json_path.string() + ": " + e.what());
  }
  return out;
}

}  // namespace footcontact
