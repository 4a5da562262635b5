// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "footcontact/evalcli.hpp"

namespace footcontact {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

void emit(const json& j, const std::string& out_path, std::ostream& out) {
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    out << text;
  } else {
    write_text(out_path, text);
  }
}

// {"samples": [{"id": ..., key: [...]}]} keyed by id, in file order.
std::vector<std::pair<std::string, json>> samples_of(const json& doc, const fs::path& origin) {
  if (!doc.is_object() || !doc.contains("samples") || !doc["samples"].is_array()) {
    throw FormatError(origin.string() + ": expected an object with a \"samples\" array");
  }
  std::vector<std::pair<std::string, json>> out;
  for (const json& s : doc["samples"]) {
    if (!s.is_object() || !s.contains("id")) {
      throw FormatError(origin.string() + ": every sample needs an \"id\"");
    }
    out.emplace_back(s["id"].get<std::string>(), s);
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json vector_json(const Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

// Config file (if any) with --set overrides layered on top.
struct ConfigFlags {
  std::string path;
  std::vector<std::string> sets;
  std::string profile;

  void attach(CLI::App& cmd) {
    cmd.add_option("--config", path, "key = value config file")->check(CLI::ExistingFile);
    cmd.add_option("--set", sets, "override a config key (key=value), repeatable");
    cmd.add_option("--profile", profile, "model profile")->check(CLI::IsMember({"desk", "paper"}));
  }

  Config build() const {
    Config c = path.empty() ? Config{} : Config::load(path);
    for (const auto& s : sets) c.set(s);
    if (!profile.empty()) c.set("profile", profile);
    c.check_known();
    return c;
  }
};

int level_index(const std::string& level) {
  switch (parse_level(level)) {
    case RegressorLevel::kVertex: return 0;
    case RegressorLevel::kJoint11: return 1;
    case RegressorLevel::kJoint3: return 2;
  }
  return 0;
}

// ---- make-data ----

struct MakeDataArgs {
  ConfigFlags cfg;
  std::string out;
  std::optional<long> count, seed, resolution;
  std::optional<double> contact_ratio;
  std::optional<std::string> shoe_source;
};

void run_make_data(const MakeDataArgs& a, std::ostream& out) {
  Config c = a.cfg.build();
  if (a.count) c.set("data.count", std::to_string(*a.count));
  if (a.seed) c.set("data.seed", std::to_string(*a.seed));
  if (a.resolution) c.set("data.resolution", std::to_string(*a.resolution));
  if (a.contact_ratio) {
    std::ostringstream s;
    s.precision(17);
    s << *a.contact_ratio;
    c.set("data.contact_ratio", s.str());
  }
  if (a.shoe_source) c.set("train.shoe_source", *a.shoe_source);
  const SceneConfig scene = c.scene();
  const long count = c.get_int("data.count", 32);
  const auto seed = static_cast<std::uint64_t>(c.get_int("data.seed", 0));
  if (count <= 0) throw InvalidArgument("data.count must be positive");
  const std::string shoes = c.get_string("train.shoe_source", "procedural");
  ShoeStyleSource::parse(shoes);

  const fs::path root(a.out);
  fs::create_directories(root);
  json gt_vertex = {{"samples", json::array()}};
  json gt_joint3 = {{"samples", json::array()}};
  for (long i = 0; i < count; ++i) {
    const SceneSample s = generate_scene(derive_seed(seed, static_cast<std::uint64_t>(i)), scene);
    const std::string id = record_name(static_cast<std::size_t>(i));
    write_record(s, root / id);
    gt_vertex["samples"].push_back({{"id", id}, {"contact", s.vertex_contact}});
    gt_joint3["samples"].push_back({{"id", id}, {"contact", s.joint3}});
  }
  write_text(root / "gt.json", gt_vertex.dump(2) + "\n");
  write_text(root / "gt_joint3.json", gt_joint3.dump(2) + "\n");
  const json manifest = {{"count", count},
                         {"seed", seed},
                         {"resolution", scene.resolution},
                         {"tolerance", scene.tolerance},
                         {"contact_ratio", scene.contact_ratio},
                         {"mesh_seed", scene.mesh_seed},
                         {"shoe_source", shoes}};
  write_text(root / "dataset.json", manifest.dump(2) + "\n");
  out << "wrote " << count << " records to " << root.string() << "\n";
}

// ---- label ----

struct LabelArgs {
  ConfigFlags cfg;
  std::string mesh, points, plane, dataset, sequence, axes, out;
  std::vector<std::string> fit_frames;
  std::optional<double> tolerance;
  bool negative_height = false;
};

Points read_points(const fs::path& path) {
  if (path.extension() == ".obj") return read_obj_vertices(path);
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  std::vector<Eigen::Vector3d> rows;
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.empty() || line[0] == '#') continue;
    for (char& ch : line) {
      if (ch == ',') ch = ' ';
    }
    std::istringstream ss(line);
    Eigen::Vector3d p;
    if (!(ss >> p.x() >> p.y() >> p.z())) {
      throw FormatError(path.string() + ":" + std::to_string(n) + ": expected x,y,z");
    }
    rows.push_back(p);
  }
  Points pts(static_cast<Eigen::Index>(rows.size()), 3);
  for (std::size_t i = 0; i < rows.size(); ++i) pts.row(static_cast<Eigen::Index>(i)) = rows[i];
  return pts;
}

GroundPlane parse_plane(const std::string& text, const AxisConvention& axes) {
  std::string t = text;
  for (char& ch : t) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream ss(t);
  GroundPlane p;
  std::string rest;
  if (!(ss >> p.a >> p.b >> p.c) || (ss >> rest)) {
    throw InvalidArgument("--plane expects a,b,c");
  }
  p.axes = axes;
  return p;
}

void run_label(const LabelArgs& a, std::ostream& out) {
  const Config c = a.cfg.build();
  AxisConvention axes = AxisConvention::y_up();
  double tol = tolerance::kMoyo;
  if (!a.dataset.empty()) {
    axes = dataset_axis_convention(a.dataset);
    tol = tolerance::for_dataset(a.dataset);
  }
  if (a.axes == "z-up") axes = AxisConvention::z_up();
  if (a.axes == "y-up") axes = AxisConvention::y_up();
  if (a.negative_height) axes.negative_height = true;
  if (a.tolerance) tol = *a.tolerance;

  GroundPlane plane;
  if (!a.plane.empty()) {
    plane = parse_plane(a.plane, axes);
  } else if (!a.fit_frames.empty()) {
    std::vector<Points> frames;
    for (const auto& f : a.fit_frames) frames.push_back(read_points(f));
    RansacParams rp;
    rp.iterations = static_cast<int>(c.get_int("ransac.iterations", rp.iterations));
    rp.inlier_distance = c.get_double("ransac.inlier_distance", rp.inlier_distance);
    rp.percentile_p = c.get_double("ransac.percentile_p", rp.percentile_p);
    rp.seed = static_cast<std::uint64_t>(c.get_int("ransac.seed", static_cast<long>(rp.seed)));
    plane = fit_plane_ransac(lowest_vertex_per_frame(frames, axes), rp, axes);
  } else if (!a.dataset.empty() && !a.sequence.empty()) {
    bool found = false;
    for (const PlaneFixture& f : load_plane_fixtures(default_plane_fixture_path())) {
      if (f.dataset == a.dataset && f.sequence == a.sequence) {
        plane = f.plane;
        found = true;
      }
    }
    if (!found) throw InvalidArgument("no plane fixture for " + a.dataset + "/" + a.sequence);
    if (a.axes.empty() && !a.negative_height) axes = plane.axes;
    plane.axes = axes;
  } else {
    throw InvalidArgument("label needs --plane, --fit-frames or --dataset with --sequence");
  }

  const Points v = a.mesh.empty() ? read_points(a.points) : read_points(a.mesh);
  const std::vector<int> labels = label_contacts(v, plane, tol);
  const json j = {{"plane", {{"a", plane.a}, {"b", plane.b}, {"c", plane.c}}},
                  {"height_axis", plane.axes.height_axis},
                  {"negative_height", plane.axes.negative_height},
                  {"tolerance", tol},
                  {"contact", labels}};
  emit(j, a.out, out);
}

// ---- train ----

struct TrainArgs {
  ConfigFlags cfg;
  std::string data, out, resume;
  std::optional<long> steps, epochs, seed;
};

void run_train(const TrainArgs& a, std::ostream& out) {
  Config c = a.cfg.build();
  if (a.steps) c.set("train.steps", std::to_string(*a.steps));
  if (a.epochs) c.set("train.epochs", std::to_string(*a.epochs));
  if (a.seed) c.set("train.seed", std::to_string(*a.seed));
  const ModelConfig mc = c.model();
  const TrainConfig tc = c.train();

  const RecordDataset records(a.data);
  if (records.size() == 0) throw InvalidArgument("no records under " + a.data);
  std::vector<SceneSample> data;
  data.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) data.push_back(records.load(i));

  FootContactModel model(mc);
  Trainer trainer(model, std::move(data), tc);
  if (!a.resume.empty()) trainer.load(a.resume);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  trainer.set_telemetry(dir / "telemetry.csv");
  const std::vector<StepRecord> log = trainer.run();
  trainer.save(dir / "checkpoint.fcckpt");
  out << "trained " << log.size() << " steps (global step " << trainer.global_step() << ")";
  if (!log.empty()) out << ", final total loss " << log.back().losses.total;
  out << "\ncheckpoint: " << (dir / "checkpoint.fcckpt").string() << "\n";
}

// ---- eval ----

struct EvalArgs {
  std::string pred, gt, level = "vertex", out;
};

void run_eval(const EvalArgs& a, std::ostream& out) {
  const auto preds = samples_of(read_json(a.pred), a.pred);
  const auto gts = samples_of(read_json(a.gt), a.gt);
  std::map<std::string, const json*> by_id;
  for (const auto& [id, s] : preds) {
    if (!by_id.emplace(id, &s).second) throw FormatError(a.pred + ": duplicate id '" + id + "'");
  }
  std::vector<Vector> probs;
  std::vector<std::vector<int>> labels;
  for (const auto& [id, s] : gts) {
    const auto it = by_id.find(id);
    if (it == by_id.end()) throw FormatError(a.pred + ": no prediction for '" + id + "'");
    if (!s.contains("contact")) throw FormatError(a.gt + ": sample '" + id + "' has no \"contact\"");
    if (!it->second->contains("probs")) {
      throw FormatError(a.pred + ": sample '" + id + "' has no \"probs\"");
    }
    probs.push_back(to_vector((*it->second)["probs"].get<std::vector<double>>()));
    labels.push_back(s["contact"].get<std::vector<int>>());
  }
  const MetricReport r =
      a.level == "joint3" ? evaluate_joint3(probs, labels) : evaluate(probs, labels);
  json j = r;
  j["level"] = a.level;
  emit(j, a.out, out);
}

// ---- infer ----

struct InferArgs {
  std::string checkpoint, image, data, out, plot, level = "vertex";
};

void run_infer(const InferArgs& a, std::ostream& out) {
  const Checkpoint ckpt = load_checkpoint(a.checkpoint);
  FootContactModel model(ckpt.model);
  restore_params(ckpt, model);
  const int level = level_index(a.level);

  std::vector<std::pair<std::string, Image>> inputs;
  if (!a.image.empty()) {
    inputs.emplace_back(fs::path(a.image).stem().string(), read_png(a.image, 3));
  } else {
    const RecordDataset records(a.data);
    for (std::size_t i = 0; i < records.size(); ++i) {
      inputs.emplace_back(records.paths()[i].filename().string(), records.load(i).image);
    }
  }
  json doc = {{"level", a.level}, {"samples", json::array()}};
  for (const auto& [id, img] : inputs) {
    const Inference inf = model.predict(img);
    doc["samples"].push_back({{"id", id},
                              {"probs", vector_json(inf.probs[level])},
                              {"ground_normal", vector_json(inf.normal)}});
    if (!a.plot.empty()) {
      const fs::path target = a.image.empty() ? fs::path(a.plot) / (id + ".png") : fs::path(a.plot);
      if (target.has_parent_path()) fs::create_directories(target.parent_path());
      emit_plot(inf.probs[0], model.mesh(), target);
    }
  }
  emit(doc, a.out, out);
}

// ---- plot ----

struct PlotArgs {
  std::string probs, out, id;
  long mesh_seed = 0;
  int size = 256;
};

void run_plot(const PlotArgs& a, std::ostream& out) {
  const json doc = read_json(a.probs);
  std::vector<double> p;
  if (doc.is_array()) {
    p = doc.get<std::vector<double>>();
  } else {
    const auto samples = samples_of(doc, a.probs);
    for (const auto& [id, s] : samples) {
      if (a.id.empty() || a.id == id) {
        p = s.at("probs").get<std::vector<double>>();
        break;
      }
    }
    if (p.empty()) throw InvalidArgument("no sample '" + a.id + "' in " + a.probs);
  }
  const FootMesh mesh = build_canonical_foot_mesh(static_cast<std::uint64_t>(a.mesh_seed));
  emit_plot(to_vector(p), mesh, a.out, a.size);
  out << "wrote " << a.out << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Dense foot contact estimation: data, labels, training, evaluation", "footcontact"};
  app.require_subcommand(1);

  MakeDataArgs md;
  auto* make_data = app.add_subcommand("make-data", "generate synthetic training records");
  md.cfg.attach(*make_data);
  make_data->add_option("--out", md.out, "output directory")->required();
  make_data->add_option("--count", md.count, "number of records");
  make_data->add_option("--seed", md.seed, "dataset seed");
  make_data->add_option("--resolution", md.resolution, "image side in pixels");
  make_data->add_option("--contact-ratio", md.contact_ratio, "fraction of scenes in contact");
  make_data->add_option("--shoe-source", md.shoe_source, "procedural or a directory of PNGs");

  LabelArgs lb;
  auto* label = app.add_subcommand("label", "label mesh vertices against a ground plane");
  lb.cfg.attach(*label);
  auto* mesh_opt = label->add_option("--mesh", lb.mesh, "OBJ mesh to label")->check(CLI::ExistingFile);
  auto* pts_opt = label->add_option("--points", lb.points, "x,y,z CSV to label")->check(CLI::ExistingFile);
  mesh_opt->excludes(pts_opt);
  auto* input = label->add_option_group("input");
  input->add_option(mesh_opt);
  input->add_option(pts_opt);
  input->require_option(1);
  label->add_option("--plane", lb.plane, "plane coefficients a,b,c");
  label->add_option("--fit-frames", lb.fit_frames, "frame meshes for a RANSAC plane fit")
      ->check(CLI::ExistingFile);
  label->add_option("--dataset", lb.dataset, "dataset preset for axes and tolerance");
  label->add_option("--sequence", lb.sequence, "plane fixture sequence (with --dataset)");
  label->add_option("--axes", lb.axes, "height axis convention")->check(CLI::IsMember({"y-up", "z-up"}));
  label->add_flag("--negative-height", lb.negative_height, "height grows along the negative axis");
  label->add_option("--tolerance", lb.tolerance, "contact distance in metres");
  label->add_option("--out", lb.out, "output JSON (stdout if omitted)");

  TrainArgs tr;
  auto* train = app.add_subcommand("train", "train a model on records");
  tr.cfg.attach(*train);
  train->add_option("--data", tr.data, "record directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--out", tr.out, "output directory")->required();
  train->add_option("--steps", tr.steps, "optimizer steps");
  train->add_option("--epochs", tr.epochs, "epochs (overrides --steps)");
  train->add_option("--seed", tr.seed, "training seed");
  train->add_option("--resume", tr.resume, "checkpoint to resume from")->check(CLI::ExistingFile);

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "score predictions against ground truth");
  eval->add_option("--pred", ev.pred, "prediction JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--gt", ev.gt, "ground-truth JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--level", ev.level, "vertex or joint3")->check(CLI::IsMember({"vertex", "joint3"}));
  eval->add_option("--out", ev.out, "output JSON (stdout if omitted)");

  InferArgs in;
  auto* infer = app.add_subcommand("infer", "predict contact for images");
  infer->add_option("--checkpoint", in.checkpoint, "trained checkpoint")->required()->check(CLI::ExistingFile);
  auto* img_opt = infer->add_option("--image", in.image, "PNG image")->check(CLI::ExistingFile);
  auto* data_opt = infer->add_option("--data", in.data, "record directory")->check(CLI::ExistingDirectory);
  img_opt->excludes(data_opt);
  auto* source = infer->add_option_group("source");
  source->add_option(img_opt);
  source->add_option(data_opt);
  source->require_option(1);
  infer->add_option("--level", in.level, "vertex, joint11 or joint3")
      ->check(CLI::IsMember({"vertex", "joint11", "joint3"}));
  infer->add_option("--out", in.out, "output JSON (stdout if omitted)");
  infer->add_option("--plot", in.plot, "heatmap PNG (a directory with --data)");

  PlotArgs pl;
  auto* plot = app.add_subcommand("plot", "render per-vertex probabilities on the foot mesh");
  plot->add_option("--probs", pl.probs, "JSON array or prediction file")->required()->check(CLI::ExistingFile);
  plot->add_option("--out", pl.out, "output PNG")->required();
  plot->add_option("--id", pl.id, "sample id within a prediction file");
  plot->add_option("--mesh-seed", pl.mesh_seed, "canonical mesh seed");
  plot->add_option("--size", pl.size, "pixels per view");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return 2;
  }

  try {
    if (*make_data) run_make_data(md, out);
    if (*label) run_label(lb, out);
    if (*train) run_train(tr, out);
    if (*eval) run_eval(ev, out);
    if (*infer) run_infer(in, out);
    if (*plot) run_plot(pl, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace footcontact
