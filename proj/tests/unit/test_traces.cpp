#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "intent/replay.hpp"
#include "intent/simgen.hpp"
#include "intent/traces.hpp"

using namespace intent;
using namespace intent::traces;

namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "intent_unit_traces";
  fs::create_directories(dir);
  return dir / name;
}

Trace generated(sim::ScenarioKind kind, std::uint64_t seed) {
  sim::ScenarioSpec spec;
  spec.kind = kind;
  spec.seed = seed;
  return sim::generate(spec, SceneConfig::demo());
}

std::vector<double> row_key(const features::FeatureVector& f, int y) {
  return {f.gamma, f.d, f.d_dot, f.alpha, f.alpha_dot, f.proximity, f.proximity_dot, static_cast<double>(y)};
}

}  // namespace

TEST_SUITE("traces") {

TEST_CASE("empty trace round-trips") {
  Trace t;
  t.header = make_header(SceneConfig::demo(), 15.0);
  const auto text = serialize_trace(t);
  const auto back = parse_trace(text);
  CHECK(same_trace(t, back));
  CHECK(serialize_trace(back) == text);
}

TEST_CASE("a 3000-frame trace round-trips bit-exactly") {
  Trace big;
  double offset = 0.0;
  for (std::uint64_t seed = 1; big.frames.size() < 3000; ++seed) {
    const auto kind = static_cast<sim::ScenarioKind>(seed % 5);
    auto t = generated(kind, seed);
    if (big.frames.empty()) big.header = t.header;
    for (auto f : t.frames) {
      f.t += offset;
      big.frames.push_back(std::move(f));
    }
    offset = big.frames.back().t + 1.0;
  }
  const auto path = scratch("big.jsonl");
  write_trace(path, big);
  const auto back = read_trace(path);
  CHECK(big.frames.size() >= 3000);
  CHECK(same_trace(big, back));
  CHECK(serialize_trace(back) == serialize_trace(big));
  for (std::size_t i = 0; i < big.frames.size(); i += 97) {
    const auto& a = big.frames[i];
    const auto& b = back.frames[i];
    CHECK(a.t == b.t);
    for (std::size_t j = 0; j < a.q.size(); ++j) CHECK((a.q[j].array() == b.q[j].array()).all());
    for (std::size_t k = 0; k < perception::kJointCount; ++k) {
      CHECK(a.skeleton.keypoints[k].u == b.skeleton.keypoints[k].u);
      CHECK(a.skeleton.keypoints[k].depth == b.skeleton.keypoints[k].depth);
    }
  }
}

TEST_CASE("parse errors are distinct") {
  const auto t = generated(sim::ScenarioKind::Manipulation, 2);
  const auto text = serialize_trace(t);
  const auto first_nl = text.find('\n');

  CHECK_THROWS_AS(parse_trace("garbage\n"), TraceVersionError);
  CHECK_THROWS_AS(parse_trace("{\"format_version\": 7}\n"), TraceVersionError);
  CHECK_THROWS_AS(parse_trace(""), TraceTruncatedError);
  CHECK_THROWS_AS(parse_trace(text.substr(0, text.size() - 25)), TraceTruncatedError);

  auto lines = text.substr(first_nl + 1);
  const auto second_nl = lines.find('\n');
  const auto third_nl = lines.find('\n', second_nl + 1);
  // Swap the first two frames.
  const std::string reordered = text.substr(0, first_nl + 1) + lines.substr(second_nl + 1, third_nl - second_nl) +
                                lines.substr(0, second_nl + 1) + lines.substr(third_nl + 1);
  CHECK_THROWS_AS(parse_trace(reordered), TraceOrderError);

  const std::string broken = text.substr(0, first_nl + 1) + "{\"t\": oops}\n" + lines;
  CHECK_THROWS_AS(parse_trace(broken), TraceFormatError);

  Trace bad = t;
  bad.frames[3].t = bad.frames[2].t;
  CHECK_THROWS_AS(write_trace(scratch("bad.jsonl"), bad), TraceOrderError);
  CHECK_THROWS_AS(read_trace(scratch("missing.jsonl")), TraceError);

  // All of them are trace errors, and none of them is a crash.
  CHECK_THROWS_AS(parse_trace("garbage\n"), TraceError);
}

TEST_CASE("dataset assembly") {
  const auto scene = SceneConfig::demo();
  const auto a = generated(sim::ScenarioKind::Manipulation, 11);
  const auto b = generated(sim::ScenarioKind::Collision, 12);
  const auto c = generated(sim::ScenarioKind::Distracted, 13);

  const auto one = assemble_dataset(std::vector<Trace>{a, b}, scene);
  CHECK(one.data.size() == a.frames.size() + b.frames.size());
  const auto second_start = one.data.x[a.frames.size()];
  CHECK(second_start.d_dot == 0.0);
  CHECK(second_start.alpha_dot == 0.0);
  CHECK(one.data.group[a.frames.size()] == 1);

  const auto fwd = assemble_dataset(std::vector<Trace>{a, b, c}, scene);
  const auto rev = assemble_dataset(std::vector<Trace>{c, a, b}, scene);
  CHECK(fwd.scaling.d_max == rev.scaling.d_max);
  std::vector<std::vector<double>> ra, rb;
  for (std::size_t i = 0; i < fwd.data.size(); ++i) ra.push_back(row_key(fwd.data.x[i], fwd.data.y[i]));
  for (std::size_t i = 0; i < rev.data.size(); ++i) rb.push_back(row_key(rev.data.x[i], rev.data.y[i]));
  std::sort(ra.begin(), ra.end());
  std::sort(rb.begin(), rb.end());
  CHECK(ra == rb);
  CHECK(assemble_dataset(std::vector<Trace>{a, b, c}, scene).corpus_hash == fwd.corpus_hash);

  auto unlabeled = a;
  unlabeled.frames[4].label.reset();
  CHECK_THROWS_AS(assemble_dataset(std::vector<Trace>{unlabeled}, scene), CorpusError);

  auto other = a;
  other.header.sensors = 12;
  CHECK_THROWS_AS(assemble_dataset(std::vector<Trace>{other}, scene), CorpusError);
}

TEST_CASE("globs") {
  const auto dir = fs::temp_directory_path() / "intent_unit_globs";
  fs::remove_all(dir);
  fs::create_directories(dir);
  for (const char* n : {"b.jsonl", "a.jsonl", "c.txt"}) std::ofstream(dir / n) << "x\n";
  const auto got = expand_globs({(dir / "*.jsonl").string(), (dir / "a.jsonl").string()});
  REQUIRE(got.size() == 2);
  CHECK(got[0].filename() == "a.jsonl");
  CHECK(got[1].filename() == "b.jsonl");
  CHECK_THROWS_AS(expand_globs({(dir / "*.none").string()}), CorpusError);
}

TEST_CASE("model files") {
  const auto scene = SceneConfig::demo();
  const auto ds = assemble_dataset(
      std::vector<Trace>{generated(sim::ScenarioKind::Manipulation, 1), generated(sim::ScenarioKind::Collision, 2)},
      scene);
  models::MlpSpec mlp;
  mlp.options.epochs = 20;
  for (const models::ModelSpec& spec : {models::ModelSpec{models::KnnSpec{11}}, models::ModelSpec{mlp}}) {
    ModelFile mf{models::train(spec, ds.data, models::FeatureMask::parse("TS,HP,GA"), ds.scaling), 4,
                 ds.corpus_hash, scene.id(), ds.data.size()};
    const auto path = scratch("model.json");
    save_model(path, mf);
    const auto back = load_model(path);
    CHECK(model_to_json(back) == model_to_json(mf));
    CHECK(back.corpus_hash == ds.corpus_hash);
    for (std::size_t i = 0; i < ds.data.size(); i += 7) {
      const auto p = models::predict(mf.model, ds.data.x[i]);
      const auto q = models::predict(back.model, ds.data.x[i]);
      CHECK(p.score == q.score);
    }
  }
  CHECK_THROWS_AS(model_from_json("{\"format_version\": 99}"), TraceVersionError);
  CHECK_THROWS_AS(model_from_json("not json"), TraceFormatError);
}

TEST_CASE("stored network reproduces its recorded score") {
  // Written once from a verified training run; guards the file format and the forward pass.
  const auto f = load_model(fs::path(INTENT_SOURCE_DIR) / "tests/data/golden_mlp.json");
  REQUIRE(std::holds_alternative<models::MlpModel>(f.model));
  features::FeatureVector q;
  q.gamma = 1.0;
  q.d = 0.1;
  q.d_dot = 0.2;
  q.alpha = 0.05;
  q.alpha_dot = 0.3;
  q.proximity = 0.1;
  q.proximity_dot = 0.2;
  const auto p = models::predict(f.model, q);
  CHECK(p.score == doctest::Approx(0.78665929605718521).epsilon(1e-12));
  CHECK(p.label == 1);
}

TEST_CASE("reports reproduce the reference table row") {
  EvalReport r;
  r.rows.push_back(report_row("kNN (k=11)", models::FeatureMask::all(), models::ConfusionMatrix{607, 2145, 163, 87}));
  r.frames = 3002;
  r.positives = 694;
  r.corpus_hash = "c0ffee";
  r.config_hash = "beef";
  CHECK(std::abs(r.rows[0].accuracy - (607.0 + 2145.0) / 3002.0) < 1e-12);
  const auto text = format_report(r);
  CHECK(text.find("0.9167") != std::string::npos);
  CHECK(text.find("607 2145 163 87") != std::string::npos);

  const auto back = report_from_json(report_to_json(r));
  CHECK(report_to_json(back) == report_to_json(r));
  CHECK(back.rows[0].confusion == r.rows[0].confusion);
  CHECK_THROWS_AS(report_from_json("{\"format_version\": 2}"), TraceVersionError);
}

TEST_CASE("replay logs and plot export") {
  const auto scene = SceneConfig::demo();
  const auto train = assemble_dataset(
      std::vector<Trace>{generated(sim::ScenarioKind::Manipulation, 5), generated(sim::ScenarioKind::Distracted, 6),
                         generated(sim::ScenarioKind::Idle, 7)},
      scene);
  const auto model = models::train(models::KnnSpec{11}, train.data, models::FeatureMask::all(), train.scaling);
  const auto trace = generated(sim::ScenarioKind::Distracted, 8);
  const auto res = replay::run_replay(trace, model, scene);
  const auto path = scratch("replay.jsonl");
  write_replay_log(path, res.log);
  const auto back = read_replay_log(path);
  CHECK(back.records.size() == trace.frames.size());
  CHECK(back.control == res.log.control);
  for (std::size_t i = 0; i < back.records.size(); ++i) {
    CHECK(back.records[i].ee == res.log.records[i].ee);
    CHECK(back.records[i].features == res.log.records[i].features);
  }

  const auto csv = replay_csv(back);
  const auto header = csv.substr(0, csv.find('\n'));
  CHECK(header == "t,gamma,d,d_dot,alpha,alpha_dot,raw,smoothed,intention,ee_x,ee_y,ee_z,ee_speed,force");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == trace.frames.size() + 1);
}

}
