// Copyright 2026 The footcontact Authors
// SPDX-License-Identifier: Apache-2.0

#include "footcontact/evalcli.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace footcontact {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Counts {
  double p, r, f;
};

// Independent confusion-matrix counter.
std::optional<Counts> brute(const Vector& probs, const std::vector<int>& gt) {
  int tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const int pred = probs(static_cast<Eigen::Index>(i)) > 0.5 ? 1 : 0;
    if (pred == 1 && gt[i] == 1) ++tp;
    if (pred == 1 && gt[i] == 0) ++fp;
    if (pred == 0 && gt[i] == 1) ++fn;
  }
  if (tp + fn == 0) return std::nullopt;
  const double p = tp + fp == 0 ? 0.0 : tp / double(tp + fp);
  const double r = tp / double(tp + fn);
  return Counts{p, r, p + r == 0 ? 0.0 : 2 * p * r / (p + r)};
}

TEST(Metrics, MatchesBruteForceOnRandomFixtures) {
  Rng rng(41);
  std::vector<Vector> probs;
  std::vector<std::vector<int>> gt;
  double sp = 0, sr = 0, sf = 0;
  long n = 0, skipped = 0;
  for (int s = 0; s < 1000; ++s) {
    const int v = 1 + static_cast<int>(rng() % 40);
    const double density = uniform(rng, 0.0, 0.6);
    Vector p(v);
    std::vector<int> g(v);
    for (int i = 0; i < v; ++i) {
      p(i) = uniform(rng, 0.0, 1.0);
      g[i] = uniform(rng, 0.0, 1.0) < density ? 1 : 0;
    }
    if (s % 50 == 0) p(0) = 0.5;
    const auto c = brute(p, g);
    const auto m = sample_metrics(p, g);
    ASSERT_EQ(c.has_value(), m.has_value());
    if (c) {
      EXPECT_EQ(m->precision, c->p);
      EXPECT_EQ(m->recall, c->r);
      EXPECT_EQ(m->f1, c->f);
      sp += c->p;
      sr += c->r;
      sf += c->f;
      ++n;
    } else {
      ++skipped;
    }
    probs.push_back(p);
    gt.push_back(g);
  }
  const MetricReport r = evaluate(probs, gt);
  EXPECT_EQ(r.n_evaluated, n);
  EXPECT_EQ(r.n_skipped, skipped);
  EXPECT_GT(skipped, 0);
  EXPECT_DOUBLE_EQ(r.precision, sp / n);
  EXPECT_DOUBLE_EQ(r.recall, sr / n);
  EXPECT_DOUBLE_EQ(r.f1, sf / n);
}

TEST(Metrics, FourVertexFixture) {
  const auto m = sample_metrics((Vector(4) << 0.9, 0.2, 0.8, 0.1).finished(), {1, 1, 0, 0});
  ASSERT_TRUE(m);
  EXPECT_DOUBLE_EQ(m->precision, 0.5);
  EXPECT_DOUBLE_EQ(m->recall, 0.5);
  EXPECT_DOUBLE_EQ(m->f1, 0.5);
}

TEST(Metrics, PerfectAndEmptyPredictions) {
  const auto all = sample_metrics(Vector::Ones(5), {1, 1, 1, 1, 1});
  EXPECT_EQ(all->f1, 1.0);
  const auto none = sample_metrics(Vector::Zero(3), {1, 0, 0});
  EXPECT_EQ(none->precision, 0.0);
  EXPECT_EQ(none->f1, 0.0);
  // Exactly 0.5 is not contact.
  EXPECT_EQ(sample_metrics(Vector::Constant(2, 0.5), {1, 1})->recall, 0.0);
}

TEST(Metrics, ZeroPositiveSamplesAreSkipped) {
  const MetricReport r = evaluate({Vector::Ones(3), Vector::Ones(3)}, {{0, 0, 0}, {1, 1, 1}});
  EXPECT_EQ(r.n_skipped, 1);
  EXPECT_EQ(r.n_evaluated, 1);
  EXPECT_EQ(r.precision, 1.0);
}

TEST(Metrics, AveragesPerSampleNotPooled) {
  // Sample A: 1 TP of 1. Sample B: 1 TP, 3 FP, 0 FN over 4 vertices.
  const std::vector<Vector> p = {(Vector(1) << 0.9).finished(),
                                 (Vector(4) << 0.9, 0.9, 0.9, 0.9).finished()};
  const std::vector<std::vector<int>> g = {{1}, {1, 0, 0, 0}};
  const MetricReport r = evaluate(p, g);
  EXPECT_DOUBLE_EQ(r.precision, (1.0 + 0.25) / 2);
  const double pooled = 2.0 / 5.0;
  EXPECT_GT(std::abs(r.precision - pooled), 0.1);
}

TEST(Metrics, LengthMismatchRejected) {
  EXPECT_THROW(sample_metrics(Vector::Ones(3), {1, 0}), InvalidArgument);
  EXPECT_THROW(evaluate({Vector::Ones(2)}, {}), InvalidArgument);
}

TEST(Metrics, ToeAggregationUsesOr) {
  auto v3 = [](double a, double b, double c) { return (Vector(3) << a, b, c).finished(); };
  // (toe, heel) after OR: pred (1,0) vs gt (1,0) -> perfect.
  EXPECT_EQ(evaluate_joint3({v3(0.9, 0.1, 0.1)}, {{1, 0, 0}}).f1, 1.0);
  EXPECT_EQ(evaluate_joint3({v3(0.1, 0.9, 0.1)}, {{1, 0, 0}}).f1, 1.0);
  // Hand-enumerated mix:
  //  s0 pred (1,1) gt (1,0): P 1/2 R 1 F 2/3
  //  s1 pred (0,1) gt (1,1): P 1   R 1/2 F 2/3
  //  s2 pred (1,0) gt (0,0): skipped
  const MetricReport r = evaluate_joint3({v3(0.2, 0.7, 0.6), v3(0.1, 0.3, 0.9), v3(0.8, 0.8, 0.1)},
                                         {{0, 1, 0}, {1, 1, 1}, {0, 0, 0}});
  EXPECT_EQ(r.n_evaluated, 2);
  EXPECT_EQ(r.n_skipped, 1);
  EXPECT_DOUBLE_EQ(r.precision, 0.75);
  EXPECT_DOUBLE_EQ(r.recall, 0.75);
  EXPECT_DOUBLE_EQ(r.f1, 2.0 / 3.0);
  EXPECT_THROW(evaluate_joint3({Vector::Ones(4)}, {{1, 1, 1, 1}}), InvalidArgument);
}

TEST(Metrics, ReportJson) {
  json j = evaluate({Vector::Ones(2)}, {{1, 0}});
  EXPECT_EQ(j["precision"], 0.5);
  EXPECT_EQ(j["n_evaluated"], 1);
  EXPECT_EQ(j["threshold"], 0.5);
}

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir = fs::temp_directory_path() /
          ("footcontact_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }
  fs::path dir;
};

using Plot = TempDir;

TEST_F(Plot, AllZerosIsBlueAllOnesIsRed) {
  const FootMesh mesh = build_canonical_foot_mesh(0);
  for (const double p : {0.0, 1.0}) {
    const fs::path out = dir / "plot.png";
    emit_plot(Vector::Constant(265, p), mesh, out, 64);
    const Image img = read_png(out, 3);
    EXPECT_EQ(img.width, 128);
    EXPECT_EQ(img.height, 64);
    long coloured = 0;
    for (int y = 0; y < img.height; ++y) {
      for (int x = 0; x < img.width; ++x) {
        const float r = img.at(0, y, x), g = img.at(1, y, x), b = img.at(2, y, x);
        if (r == 1.0f && g == 1.0f && b == 1.0f) continue;
        ++coloured;
        EXPECT_EQ(g, 0.0f);
        EXPECT_EQ(r, p == 1.0 ? 1.0f : 0.0f);
        EXPECT_EQ(b, p == 1.0 ? 0.0f : 1.0f);
      }
    }
    EXPECT_GT(coloured, 500);
  }
}

TEST_F(Plot, RejectsBadInput) {
  const FootMesh mesh = build_canonical_foot_mesh(0);
  EXPECT_THROW(emit_plot(Vector::Zero(10), mesh, dir / "x.png"), InvalidArgument);
  EXPECT_THROW(emit_plot(Vector::Zero(265), mesh, dir / "missing" / "deeper" / "x.png"), IoError);
}

TEST(ConfigFormat, ParsesCommentsAndOverrides) {
  Config c = Config::parse("# top\nmodel.dim = 32  # inline\n\ntrain.lr=0.001\n");
  EXPECT_EQ(c.get_int("model.dim", 0), 32);
  EXPECT_EQ(c.get_double("train.lr", 0), 0.001);
  c.set("train.lr=0.5");
  EXPECT_EQ(c.train().base_lr, 0.5);
  EXPECT_EQ(c.model().encoder.dim, 32);
  EXPECT_EQ(c.model().encoder.resolution, 64);
  EXPECT_NO_THROW(c.check_known());
}

TEST(ConfigFormat, Errors) {
  EXPECT_THROW(Config::parse("just words\n"), FormatError);
  EXPECT_THROW(Config::parse("= 3\n"), FormatError);
  EXPECT_THROW(Config::parse("model.dimm = 3").check_known(), InvalidArgument);
  EXPECT_THROW(Config::parse("model.dim = 3.5").model(), InvalidArgument);
  EXPECT_THROW(Config::parse("train.augment = maybe").train(), InvalidArgument);
  EXPECT_THROW(Config::parse("profile = huge").model(), InvalidArgument);
  Config c;
  EXPECT_THROW(c.set("novalue"), InvalidArgument);
}

TEST(ConfigFormat, DefaultsAreConsistent) {
  Config c;
  for (const auto& [k, v] : config_defaults()) {
    if (k != "data.resolution") c.set(k, v);
  }
  EXPECT_NO_THROW(c.check_known());
  EXPECT_EQ(c.model().encoder.patch, ModelConfig::desk().encoder.patch);
  EXPECT_EQ(c.train().base_lr, 1e-5);
  EXPECT_EQ(c.scene().resolution, 64);
  EXPECT_EQ(Config::parse("profile = paper").scene().resolution, 224);
}

struct CliResult {
  int code;
  std::string out, err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "footcontact");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

using Cli = TempDir;

TEST_F(Cli, UsageExitCodes) {
  EXPECT_EQ(cli({"--help"}).code, 0);
  EXPECT_EQ(cli({"eval", "--help"}).code, 0);
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"eval", "--gt", "x"}).code, 2);
  EXPECT_EQ(cli({"plot", "--bogus"}).code, 2);
  const CliResult r = cli({"eval", "--pred", (dir / "nope.json").string(), "--gt", "y"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, EvalPrintsReport) {
  std::ofstream(dir / "p.json") << R"({"samples":[{"id":"a","probs":[0.9,0.2,0.8,0.1]},{"id":"b","probs":[0.1]}]})";
  std::ofstream(dir / "g.json") << R"({"samples":[{"id":"a","contact":[1,1,0,0]},{"id":"b","contact":[0]}]})";
  const CliResult r = cli({"eval", "--pred", (dir / "p.json").string(), "--gt", (dir / "g.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const json j = json::parse(r.out);
  EXPECT_EQ(j["f1"], 0.5);
  EXPECT_EQ(j["n_skipped"], 1);

  std::ofstream(dir / "bad.json") << R"({"samples":[{"id":"zzz","probs":[1]}]})";
  EXPECT_EQ(cli({"eval", "--pred", (dir / "bad.json").string(), "--gt", (dir / "g.json").string()}).code, 1);
}

TEST_F(Cli, LabelWithExplicitPlane) {
  std::ofstream(dir / "pts.csv") << "0,0.005,0\n0,0.5,0\n1,-0.002,1\n";
  const CliResult r = cli({"label", "--points", (dir / "pts.csv").string(), "--plane", "0,0,0",
                           "--tolerance", "0.01"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(json::parse(r.out)["contact"], json({1, 0, 1}));
  EXPECT_EQ(cli({"label", "--points", (dir / "pts.csv").string()}).code, 1);
  EXPECT_EQ(cli({"label", "--plane", "0,0,0"}).code, 2);
}

TEST_F(Cli, MakeDataIsDeterministic) {
  const auto run = [&](const std::string& sub) {
    return cli({"make-data", "--out", (dir / sub).string(), "--count", "2", "--seed", "7",
                "--resolution", "32"});
  };
  ASSERT_EQ(run("a").code, 0);
  ASSERT_EQ(run("b").code, 0);
  for (const char* f : {"gt.json", "sample_000001/labels.json", "sample_000000/image.png"}) {
    std::ifstream a(dir / "a" / f, std::ios::binary), b(dir / "b" / f, std::ios::binary);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    EXPECT_FALSE(sa.str().empty()) << f;
    EXPECT_EQ(sa.str(), sb.str()) << f;
  }
  EXPECT_EQ(RecordDataset(dir / "a").size(), 2u);
}

TEST_F(Cli, PlotFromArray) {
  std::ofstream(dir / "p.json") << json(std::vector<double>(265, 0.3)).dump();
  const CliResult r = cli({"plot", "--probs", (dir / "p.json").string(), "--out",
                           (dir / "h.png").string(), "--size", "32"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_png(dir / "h.png").width, 64);
}

TEST_F(Cli, TrainInferEvalRoundTrip) {
  const std::string data = (dir / "data").string();
  ASSERT_EQ(cli({"make-data", "--out", data, "--count", "2", "--seed", "3"}).code, 0);
  const std::string run = (dir / "run").string();
  const CliResult t = cli({"train", "--data", data, "--out", run, "--steps", "1", "--set",
                           "train.batch_size=2", "--set", "model.depth=2"});
  ASSERT_EQ(t.code, 0) << t.err;
  std::ifstream csv(dir / "run" / "telemetry.csv");
  std::string header, row;
  std::getline(csv, header);
  EXPECT_TRUE(static_cast<bool>(std::getline(csv, row)));

  const std::string ckpt = (dir / "run" / "checkpoint.fcckpt").string();
  const std::string pred = (dir / "pred.json").string();
  const CliResult i = cli({"infer", "--checkpoint", ckpt, "--data", data, "--out", pred, "--plot",
                           (dir / "plots").string()});
  ASSERT_EQ(i.code, 0) << i.err;
  EXPECT_TRUE(fs::exists(dir / "plots" / "sample_000001.png"));
  const json p = json::parse(std::ifstream(pred));
  ASSERT_EQ(p["samples"].size(), 2u);
  EXPECT_EQ(p["samples"][0]["probs"].size(), 265u);
  const CliResult e = cli({"eval", "--pred", pred, "--gt", data + "/gt.json"});
  EXPECT_EQ(e.code, 0) << e.err;

  const CliResult again = cli({"infer", "--checkpoint", ckpt, "--data", data});
  const CliResult twice = cli({"infer", "--checkpoint", ckpt, "--data", data});
  EXPECT_EQ(again.out, twice.out);
  EXPECT_EQ(cli({"train", "--data", data, "--out", run, "--set", "model.nope=1"}).code, 1);
}

}  // namespace
}  // namespace footcontact
