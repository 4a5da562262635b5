// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/foot_mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <nlohmann/json.hpp>
#include <numbers>
#include <sstream>

namespace footcontact {

const char* part_name(FootPart part) {
  switch (part) {
    case FootPart::kBigToe: return "big_toe";
    case FootPart::kSecondToe: return "second_toe";
    case FootPart::kMiddleToe: return "middle_toe";
    case FootPart::kFourthToe: return "fourth_toe";
    case FootPart::kSmallToe: return "small_toe";
    case FootPart::kHeel: return "heel";
    case FootPart::kFront: return "front";
    case FootPart::kBottom: return "bottom";
    case FootPart::kLeft: return "left";
    case FootPart::kRight: return "right";
    case FootPart::kBack: return "back";
  }
  return "unknown";
}

std::vector<int> FootMesh::part_members(FootPart part) const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(part_labels.size()); ++v) {
    if (part_labels[v] == static_cast<int>(part)) out.push_back(v);
  }
  return out;
}

void validate_mesh(const FootMesh& mesh) {
  const int v = mesh.vertex_count();
  if (v != kNumFootVertices) {
    throw InvalidArgument("foot mesh must have " + std::to_string(kNumFootVertices) +
                          " vertices, got " + std::to_string(v));
  }
  if (static_cast<int>(mesh.part_labels.size()) != v) {
    throw InvalidArgument("foot mesh part_labels length does not match vertex count");
  }
  for (const auto& f : mesh.faces) {
    for (int idx : f) {
      if (idx < 0 || idx >= v) throw InvalidArgument("foot mesh face index out of range");
    }
  }
  std::array<int, kNumFootParts> counts{};
  for (int label : mesh.part_labels) {
    if (label < 0 || label >= kNumFootParts) {
      throw InvalidArgument("foot mesh part label out of range: " + std::to_string(label));
    }
    ++counts[label];
  }
  for (int p = 0; p < kNumFootParts; ++p) {
    if (counts[p] == 0) {
      throw InvalidArgument(std::string("foot mesh part is empty: ") +
                            part_name(static_cast<FootPart>(p)));
    }
  }
}

namespace {

// Ring layout: 11 rings between a heel pole and a toe pole;
// 10 x 24 + 23 + 2 poles = 265 vertices.
constexpr int kRings = 11;
constexpr int ring_size(int k) { return k == kRings ? 23 : 24; }

// Lateral toe lobe centres in units of the half-width, big toe first.
constexpr std::array<double, 5> kToeCentres{0.55, 0.25, -0.02, -0.28, -0.52};
constexpr std::array<double, 5> kToeAmplitude{1.0, 0.8, 0.7, 0.6, 0.5};

// Part thresholds, as fractions of foot length (u) or height.
constexpr double kToeStart = 0.8;      // u beyond which vertices belong to toes
constexpr double kHeelEnd = 0.2;       // heel cap: u below this ...
constexpr double kHeelHeight = 0.5;    // ... and y below this fraction of height
constexpr double kPlantarSin = -0.3;   // sin(phi) below this is plantar
constexpr double kDorsalFront = 0.62;  // dorsal u above this is front
constexpr double kDorsalBack = 0.3;    // dorsal u below this is back

double width_profile(double u) {
  if (u <= 0.72) return 0.62 + 0.38 * std::sin(0.5 * std::numbers::pi * u / 0.72);
  const double t = (u - 0.72) / 0.28;
  return 1.0 - 0.2 * t * t;
}

double height_profile(double u) {
  return u < 0.45 ? 1.0 : 1.0 - 0.65 * (u - 0.45) / 0.55;
}

double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * (3.0 - 2.0 * t);
}

int nearest_toe(double z_norm) {
  int best = 0;
  for (int t = 1; t < 5; ++t) {
    if (std::abs(z_norm - kToeCentres[t]) < std::abs(z_norm - kToeCentres[best])) best = t;
  }
  return best;
}

struct RingInfo {
  int start;
  int count;
  double phase;
};

// Emits triangles between consecutive rings by merging their angles.
// A pole is a ring of size 1 with a null angle step.
void stitch(std::vector<Face>& faces, const RingInfo& a, const RingInfo& b) {
  const double two_pi = 2.0 * std::numbers::pi;
  auto angle = [&](const RingInfo& r, int i) {
    return r.count == 1 ? 0.0 : r.phase + two_pi * i / r.count;
  };
  auto idx = [](const RingInfo& r, int i) { return r.start + (i % r.count); };
  const int na = a.count == 1 ? 0 : a.count;
  const int nb = b.count == 1 ? 0 : b.count;
  int i = 0;
  int j = 0;
  while (i < na || j < nb) {
    const bool advance_a =
        j >= nb || (i < na && angle(a, i + 1) <= angle(b, j + 1));
    if (advance_a) {
      faces.push_back({idx(a, i), idx(b, j), idx(a, i + 1)});
      ++i;
    } else {
      faces.push_back({idx(a, i), idx(b, j), idx(b, j + 1)});
      ++j;
    }
  }
}

}  // namespace

FootMesh build_canonical_foot_mesh(std::uint64_t seed) {
  Rng rng(derive_seed(seed, 0xf007));
  const double length = 0.26 * (1.0 + uniform(rng, -0.05, 0.05));
  const double half_width = 0.05 * (1.0 + uniform(rng, -0.05, 0.05));
  const double height = 0.09 * (1.0 + uniform(rng, -0.05, 0.05));
  const double toe_reach = 0.025 * length;

  FootMesh mesh;
  mesh.vertices.resize(kNumFootVertices, 3);
  mesh.part_labels.assign(kNumFootVertices, 0);
  std::vector<double> u_of(kNumFootVertices);
  std::vector<double> sin_of(kNumFootVertices);
  std::vector<double> znorm_of(kNumFootVertices);

  auto place = [&](int vi, double theta, double phi) {
    const double u = 0.5 * (1.0 - std::cos(theta));
    const double r = std::sin(theta);
    const double hp = height_profile(u);
    double z = half_width * width_profile(u) * r * std::cos(phi);
    double y = height * hp * (0.35 + 0.65 * r * std::sin(phi));
    y = std::max(y, 0.0);  // flat sole
    const double zn = z / half_width;
    double bump = 0.0;
    for (int t = 0; t < 5; ++t) {
      const double d = (zn - kToeCentres[t]) / 0.14;
      bump = std::max(bump, kToeAmplitude[t] * std::exp(-d * d));
    }
    const double x = length * u + toe_reach * bump * smoothstep((u - kToeStart) / 0.2);
    mesh.vertices.row(vi) << x, y, z;
    u_of[vi] = u;
    sin_of[vi] = r > 0 ? std::sin(phi) : 0.0;
    znorm_of[vi] = zn;
  };

  std::vector<RingInfo> rings;
  int vi = 0;
  place(vi, 0.0, 0.0);
  rings.push_back({vi++, 1, 0.0});
  for (int k = 1; k <= kRings; ++k) {
    const int n = ring_size(k);
    const double phase = (k % 2 ? 0.5 : 0.0) * 2.0 * std::numbers::pi / n;
    const double theta = std::numbers::pi * k / (kRings + 1);
    rings.push_back({vi, n, phase});
    for (int i = 0; i < n; ++i) place(vi++, theta, phase + 2.0 * std::numbers::pi * i / n);
  }
  place(vi, std::numbers::pi, 0.0);
  rings.push_back({vi++, 1, 0.0});

  for (std::size_t r = 0; r + 1 < rings.size(); ++r) stitch(mesh.faces, rings[r], rings[r + 1]);

  for (int v = 0; v < kNumFootVertices; ++v) {
    const double u = u_of[v];
    const double y = mesh.vertices(v, 1);
    FootPart part;
    if (u > kToeStart) {
      part = static_cast<FootPart>(nearest_toe(znorm_of[v]));
    } else if (u < kHeelEnd && y < kHeelHeight * height) {
      part = FootPart::kHeel;
    } else if (sin_of[v] < kPlantarSin) {
      part = FootPart::kBottom;
    } else if (u > kDorsalFront) {
      part = FootPart::kFront;
    } else if (u < kDorsalBack) {
      part = FootPart::kBack;
    } else {
      part = mesh.vertices(v, 2) > 0 ? FootPart::kLeft : FootPart::kRight;
    }
    mesh.part_labels[v] = static_cast<int>(part);
  }
  return mesh;
}

const char* level_name(RegressorLevel level) {
  switch (level) {
    case RegressorLevel::kVertex: return "vertex";
    case RegressorLevel::kJoint11: return "joint11";
    case RegressorLevel::kJoint3: return "joint3";
  }
  return "unknown";
}

RegressorLevel parse_level(std::string_view name) {
  if (name == "vertex") return RegressorLevel::kVertex;
  if (name == "joint11") return RegressorLevel::kJoint11;
  if (name == "joint3") return RegressorLevel::kJoint3;
  throw InvalidArgument("unknown regressor level '" + std::string(name) +
                        "' (expected vertex, joint11 or joint3)");
}

RegressorMatrix build_regressor(const FootMesh& mesh, RegressorLevel level) {
  validate_mesh(mesh);
  const int v = mesh.vertex_count();
  RegressorMatrix reg;
  reg.level = level;
  switch (level) {
    case RegressorLevel::kVertex:
      reg.weights = Matrix::Identity(v, v);
      return reg;
    case RegressorLevel::kJoint11:
    case RegressorLevel::kJoint3: {
      Matrix joint11 = Matrix::Zero(kNumFootParts, v);
      for (int p = 0; p < kNumFootParts; ++p) {
        const auto members = mesh.part_members(static_cast<FootPart>(p));
        const double w = 1.0 / static_cast<double>(members.size());
        for (int m : members) joint11(p, m) = w;
      }
      if (level == RegressorLevel::kJoint11) {
        reg.weights = std::move(joint11);
      } else {
        reg.weights.resize(kNumKeypoints, v);
        for (int k = 0; k < kNumKeypoints; ++k) {
          reg.weights.row(k) = joint11.row(static_cast<int>(kKeypointParts[k]));
        }
      }
      return reg;
    }
  }
  throw InvalidArgument("unknown regressor level id " +
                        std::to_string(static_cast<int>(level)));
}

RegressorMatrix build_regressor(const FootMesh& mesh, std::string_view level) {
  return build_regressor(mesh, parse_level(level));
}

std::vector<RegressorMatrix> build_all_regressors(const FootMesh& mesh) {
  return {build_regressor(mesh, RegressorLevel::kVertex),
          build_regressor(mesh, RegressorLevel::kJoint11),
          build_regressor(mesh, RegressorLevel::kJoint3)};
}

std::vector<Vector> project_levels(const Vector& vertex_values,
                                   const std::vector<RegressorMatrix>& regressors) {
  std::vector<Vector> out;
  out.reserve(regressors.size());
  for (const auto& reg : regressors) {
    if (reg.weights.cols() != vertex_values.size()) {
      throw InvalidArgument("project_levels: expected " + std::to_string(reg.weights.cols()) +
                            " vertex values, got " + std::to_string(vertex_values.size()));
    }
    out.push_back(reg.weights * vertex_values);
  }
  return out;
}

CoarseTargets coarse_contact_targets(const std::vector<int>& vertex_contact,
                                     const FootMesh& mesh) {
  if (static_cast<int>(vertex_contact.size()) != mesh.vertex_count()) {
    throw InvalidArgument("coarse_contact_targets: length mismatch");
  }
  CoarseTargets t;
  t.joint11.assign(kNumFootParts, 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const int c = vertex_contact[v];
    if (c != 0 && c != 1) {
      throw InvalidArgument("coarse_contact_targets: non-binary contact value " +
                            std::to_string(c) + " at vertex " + std::to_string(v));
    }
    if (c) t.joint11[mesh.part_labels[v]] = 1;
  }
  t.joint3.resize(kNumKeypoints);
  for (int k = 0; k < kNumKeypoints; ++k) {
    t.joint3[k] = t.joint11[static_cast<int>(kKeypointParts[k])];
  }
  return t;
}

std::filesystem::path part_labels_path(const std::filesystem::path& obj_path) {
  auto p = obj_path;
  p.replace_extension(".parts.json");
  return p;
}

void write_mesh_obj(const FootMesh& mesh, const std::filesystem::path& obj_path) {
  std::ofstream out(obj_path);
  if (!out) throw IoError("cannot write " + obj_path.string());
  out << std::setprecision(17);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    out << "v " << mesh.vertices(v, 0) << ' ' << mesh.vertices(v, 1) << ' '
        << mesh.vertices(v, 2) << '\n';
  }
  for (const auto& f : mesh.faces) {
    out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
  }
  if (!out) throw IoError("failed writing " + obj_path.string());

  std::ofstream side(part_labels_path(obj_path));
  if (!side) throw IoError("cannot write " + part_labels_path(obj_path).string());
  side << nlohmann::json{{"part_labels", mesh.part_labels}}.dump() << '\n';
}

namespace {

void parse_obj(const std::filesystem::path& path, std::vector<std::array<double, 3>>& verts,
               std::vector<Face>* faces) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "v") {
      std::array<double, 3> p{};
      if (!(ls >> p[0] >> p[1] >> p[2])) {
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad vertex");
      }
      verts.push_back(p);
    } else if (tag == "f" && faces) {
      Face f{};
      for (int k = 0; k < 3; ++k) {
        std::string tok;
        if (!(ls >> tok)) {
          throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad face");
        }
        f[k] = std::stoi(tok.substr(0, tok.find('/'))) - 1;
      }
      faces->push_back(f);
    }
  }
}

}  // namespace

Vertices read_obj_vertices(const std::filesystem::path& obj_path) {
  std::vector<std::array<double, 3>> verts;
  parse_obj(obj_path, verts, nullptr);
  Vertices out(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    out.row(static_cast<Eigen::Index>(i)) << verts[i][0], verts[i][1], verts[i][2];
  }
  return out;
}

FootMesh read_mesh_obj(const std::filesystem::path& obj_path) {
  std::vector<std::array<double, 3>> verts;
  FootMesh mesh;
  parse_obj(obj_path, verts, &mesh.faces);
  mesh.vertices.resize(static_cast<Eigen::Index>(verts.size()), 3);
  for (std::size_t i = 0; i < verts.size(); ++i) {
    mesh.vertices.row(static_cast<Eigen::Index>(i)) << verts[i][0], verts[i][1], verts[i][2];
  }
  const auto side = part_labels_path(obj_path);
  std::ifstream in(side);
  if (!in) throw IoError("missing part label sidecar " + side.string());
  try {
    nlohmann::json j = nlohmann::json::parse(in);
    mesh.part_labels = j.at("part_labels").get<std::vector<int>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(side.string() + ": " + e.what());
  }
  validate_mesh(mesh);
  return mesh;
}

void write_regressor_csv(const RegressorMatrix& reg, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < reg.weights.rows(); ++r) {
    for (Eigen::Index c = 0; c < reg.weights.cols(); ++c) {
      if (c) out << ',';
      out << reg.weights(r, c);
    }
    out << '\n';
  }
}

}  // namespace footcontact
