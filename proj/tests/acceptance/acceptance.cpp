// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "intent/pipeline.hpp"
#include "intent/replay.hpp"
#include "intent/simgen.hpp"
#include "intent/traces.hpp"

using namespace intent;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

const SceneConfig& scene() {
  static const SceneConfig s = SceneConfig::demo();
  return s;
}

sim::Corpus corpus_for(std::uint64_t seed) {
  sim::CorpusMix mix;
  mix.seed = seed;
  return sim::build_corpus(sim::expand_mix(mix), scene());
}

const sim::Corpus& default_corpus() {
  static const sim::Corpus c = corpus_for(1);
  return c;
}

// ---- 1 --------------------------------------------------------------------

Outcome accuracy_identity() {
  const auto& data = default_corpus().dataset.data;
  const auto cv = models::cross_validate(data, models::FeatureMask::all(), models::KnnSpec{11}, 5, 1);
  traces::EvalReport r;
  r.rows.push_back(traces::report_row("kNN (k=11)", models::FeatureMask::all(), cv));
  const auto& cm = r.rows[0].confusion;
  const double identity = std::abs(r.rows[0].accuracy - static_cast<double>(cm.tp + cm.tn) / cm.total());

  traces::EvalReport table;
  table.rows.push_back(
      traces::report_row("kNN (k=11)", models::FeatureMask::all(), models::ConfusionMatrix{607, 2145, 163, 87}));
  const auto text = traces::format_report(table);
  const bool row_ok = text.find("0.9167") != std::string::npos && text.find("607 2145 163 87") != std::string::npos;
  return {identity < 1e-12 && row_ok && cm.total() == static_cast<std::int64_t>(data.size()),
          fmt("synthetic accuracy %.4f, identity error %.1e; reference row 607 2145 163 87 formats as 0.9167: %s",
              r.rows[0].accuracy, identity, row_ok ? "yes" : "no")};
}

// ---- 2 --------------------------------------------------------------------

Outcome ablation_ordering() {
  const auto t0 = Clock::now();
  const std::vector<models::FeatureMask> masks{models::FeatureMask::all(), models::FeatureMask::parse("TS,HP"),
                                               models::FeatureMask::parse("TS"), models::FeatureMask::parse("HP")};
  std::vector<double> mean(masks.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto c = seed == 1 ? default_corpus() : corpus_for(seed);
    for (std::size_t m = 0; m < masks.size(); ++m)
      mean[m] += models::cross_validate(c.dataset.data, masks[m], models::KnnSpec{11}, 5, seed).mean_fold_accuracy / 5;
  }
  const double elapsed = seconds_since(t0);
  const double gap = std::min({mean[0] - mean[1], mean[1] - mean[2], mean[2] - mean[3]});
  return {gap >= 0.02 && mean[0] >= 0.90 && elapsed < 60.0,
          fmt("full %.4f > TS+HP %.4f > TS %.4f > HP %.4f, smallest gap %.1f pp, %.1f s", mean[0], mean[1], mean[2],
              mean[3], 100 * gap, elapsed)};
}

// ---- 3 --------------------------------------------------------------------

Outcome ts_only_degeneracy() {
  const auto& data = default_corpus().dataset.data;
  const auto mask = models::FeatureMask::parse("TS");
  std::size_t touched = 0, touched_pos = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    touched += data.x[i].gamma == 1.0;
    touched_pos += data.x[i].gamma == 1.0 && data.y[i] == 1;
  }
  const bool majority = 2 * touched_pos > touched;

  models::MlpSpec mlp;
  bool ok = majority;
  std::string detail = fmt("touched frames %zu, intentional %zu;", touched, touched_pos);
  for (const models::ModelSpec& spec : {models::ModelSpec{models::KnnSpec{11}}, models::ModelSpec{mlp}}) {
    const auto model = models::train(spec, data, mask);
    std::map<double, std::set<int>> by_gamma;
    for (const auto& x : data.x) by_gamma[x.gamma].insert(models::predict(model, x).label);
    const bool constant = by_gamma[0.0].size() == 1 && by_gamma[1.0].size() == 1;
    const auto cv = models::cross_validate(data, mask, spec, 5, 1);
    ok = ok && constant && cv.confusion.fn == 0;
    detail += fmt(" %s constant in gamma: %s, FP %lld FN %lld;", models::model_name(spec).c_str(),
                  constant ? "yes" : "no", static_cast<long long>(cv.confusion.fp),
                  static_cast<long long>(cv.confusion.fn));
  }
  return {ok, detail};
}

// ---- 4 --------------------------------------------------------------------

Outcome knn_oracle() {
  const auto& data = default_corpus().dataset.data;
  Rng rng(2024);
  int agree = 0, total = 0;
  for (int k : {1, 11, 51}) {
    const auto model = models::knn_fit(data, models::FeatureMask::all(), k);
    std::vector<features::FeatureVector> qs;
    for (int i = 0; i < 200; ++i) {
      // Half are perturbed training rows, half uniform draws.
      features::FeatureVector q = data.x[rng.index(data.size())];
      if (i % 2) {
        q.gamma = rng.bernoulli(0.5);
        q.d = rng.uniform();
        q.d_dot = rng.uniform();
        q.alpha = rng.uniform();
        q.alpha_dot = rng.uniform();
      } else {
        q.d = std::clamp(q.d + rng.normal(0, 0.02), 0.0, 1.0);
      }
      qs.push_back(q);
    }
    const auto fast = models::knn_predict_batch(model, qs, models::Exec::Parallel);
    for (std::size_t i = 0; i < qs.size(); ++i) {
      const auto& q = qs[i];
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t r = 0; r < data.size(); ++r) {
        const auto& x = data.x[r];
        const double s = std::pow(x.gamma - q.gamma, 2) + std::pow(x.d - q.d, 2) + std::pow(x.d_dot - q.d_dot, 2) +
                         std::pow(x.alpha - q.alpha, 2) + std::pow(x.alpha_dot - q.alpha_dot, 2);
        dist.emplace_back(s, r);
      }
      std::sort(dist.begin(), dist.end());
      int votes = 0;
      for (int j = 0; j < k; ++j) votes += data.y[dist[static_cast<std::size_t>(j)].second];
      const double frac = static_cast<double>(votes) / k;
      const int label = 2 * votes > k;
      ++total;
      agree += fast[i].label == label && fast[i].score == frac;
    }
  }
  return {agree == total, fmt("%d of %d queries agree on label and vote fraction (k = 1, 11, 51)", agree, total)};
}

// ---- 5 --------------------------------------------------------------------

Outcome gradient_check() {
  const auto& data = default_corpus().dataset.data;
  double worst = 0.0;
  int checked = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Rng rng(seed + 500);
    std::vector<std::size_t> rows;
    for (int i = 0; i < 200; ++i) rows.push_back(rng.index(data.size()));
    const auto sub = data.subset(rows);
    const auto mask = models::FeatureMask::all();
    auto m = models::mlp_init(mask, seed);
    const Eigen::MatrixXd x = sub.design(mask);
    std::vector<double> g;
    models::mlp_loss_grad(m, x, sub.y, g);
    const auto p0 = m.parameters();
    std::vector<std::size_t> idx(p0.size());
    std::iota(idx.begin(), idx.end(), 0);
    rng.shuffle(idx.begin(), idx.end());
    for (int n = 0; n < 20; ++n) {
      const std::size_t i = idx[static_cast<std::size_t>(n)];
      auto p = p0;
      p[i] += 1e-5;
      m.set_parameters(p);
      const double up = models::mlp_loss(m, x, sub.y);
      p[i] = p0[i] - 1e-5;
      m.set_parameters(p);
      const double down = models::mlp_loss(m, x, sub.y);
      const double fd = (up - down) / 2e-5;
      worst = std::max(worst, std::abs(fd - g[i]) / std::max({std::abs(fd), std::abs(g[i]), 1e-8}));
      ++checked;
    }
  }
  return {worst < 1e-4, fmt("%d parameters over 5 seeds, worst relative error %.2e", checked, worst)};
}

// ---- 6 --------------------------------------------------------------------

Vec3 rand3(Rng& r) { return {r.uniform(-1, 1), r.uniform(-1, 1), r.uniform(-1, 1)}; }

features::FrameInputs random_inputs(Rng& r, double p_active) {
  features::FrameInputs in;
  const std::size_t n = 1 + r.index(46);
  for (std::size_t i = 0; i < n; ++i) {
    in.snapshot.gamma.push_back(r.bernoulli(p_active));
    in.snapshot.positions.push_back(rand3(r));
  }
  in.wrists.left = rand3(r);
  in.wrists.right = rand3(r);
  const double th = r.uniform(0, 2 * std::numbers::pi);
  in.gaze = perception::GazeEstimate::from({r.uniform(0, 640), r.uniform(0, 480)}, {std::cos(th), std::sin(th)});
  in.pois.pois = {{"l", features::PoiKind::HandLeft, {r.uniform(0, 640), r.uniform(0, 480)}, {}},
                  {"r", features::PoiKind::HandRight, {r.uniform(0, 640), r.uniform(0, 480)}, {}},
                  {"s", features::PoiKind::Static, {r.uniform(0, 640), r.uniform(0, 480)}, {}}};
  return in;
}

features::ScalingParams random_scaling(Rng& r) {
  features::ScalingParams s;
  s.d_max = r.uniform(0.05, 2);
  s.d_dot_max = r.uniform(0.05, 5);
  s.alpha_max = r.uniform(0.1, 3.1);
  s.alpha_dot_max = r.uniform(0.05, 5);
  s.proximity_dot_max = r.uniform(0.05, 5);
  return s;
}

Outcome feature_invariants() {
  Rng rng(606);
  int gating = 0, clamping = 0, tie = 0, ramp = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = random_inputs(rng, 0.0);
    const auto sc = random_scaling(rng);
    features::FeatureStreamState st;
    const auto f = features::extract(in, sc, st);
    const auto a = features::assign_hands_and_gaze(in.snapshot, in.wrists, in.gaze, in.pois, sc);
    gating += !(f.d == 1.0 && a.left == 1.0 && a.right == 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const auto sc = random_scaling(rng);
    features::FeatureStreamState st;
    double t = 0.0;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      t += rng.uniform(0.001, 0.2);
      auto in = random_inputs(rng, 0.3);
      in.t = t;
      const auto f = features::extract(in, sc, st);
      for (double v : {f.d, f.d_dot, f.alpha, f.alpha_dot}) ok = ok && v >= 0.0 && v <= 1.0;
      ok = ok && (f.gamma == 0.0 || f.gamma == 1.0);
    }
    clamping += !ok;
  }
  for (int i = 0; i < 1000; ++i) {
    const Vec3 s(rng.uniform(-1, 1), 0.0, rng.uniform(-1, 1));
    const Vec3 l(rng.uniform(-1, 1), rng.uniform(0.01, 1), rng.uniform(-1, 1));
    const Vec3 r(l.x(), -l.y(), l.z());
    auto in = random_inputs(rng, 0.0);
    in.snapshot = {{1}, {s}};
    in.wrists = {l, r};
    const auto a = features::assign_hands_and_gaze_raw(in.snapshot, in.wrists, in.gaze, in.pois);
    const auto scaled = features::scale(a, random_scaling(rng));
    tie += !(a.left.has_value() && !a.right.has_value() && scaled.right == 1.0);
  }
  for (int i = 0; i < 1000; ++i) {
    const double slope = rng.uniform(-3, 3), rmax = rng.uniform(0.5, 6);
    features::BackwardDifference bd;
    double t = rng.uniform(0, 5);
    bool ok = bd.update(slope * t, t, rmax) == 0.0;
    for (int k = 0; k < 5; ++k) {
      t += rng.uniform(0.01, 0.3);
      ok = ok && std::abs(bd.update(slope * t, t, rmax) - std::min(1.0, std::abs(slope) / rmax)) < 1e-9;
    }
    ramp += !ok;
  }
  return {gating + clamping + tie + ramp == 0,
          fmt("failures out of 1000 each: gating %d, clamping %d, tie-break %d, ramp %d", gating, clamping, tie, ramp)};
}

// ---- 7 --------------------------------------------------------------------

Outcome smoothing_bounds() {
  Rng rng(707);
  int glitch_fail = 0, latency_fail = 0;
  double worst_time = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double dt = 1.0 / rng.uniform(3.0, 60.0);
    double t = rng.uniform(0, 50);
    pipeline::IntentionState s(1.0, 0.5);
    const int base = rng.bernoulli(0.5);
    const Intention steady = base ? Intention::Intentional : Intention::Unintentional;
    const int fill = static_cast<int>(1.0 / dt) + 2 + static_cast<int>(rng.index(10));
    for (int i = 0; i < fill; ++i) s.update(t += dt, base, base);
    const auto n = static_cast<int>(s.count());
    bool held = s.update(t += dt, 1 - base, 0) == steady;
    for (int i = 0; i < 2 * n; ++i) held = held && s.update(t += dt, base, base) == steady;
    glitch_fail += !held || n < 3;

    // Sustained change away from the saturated state.
    const int need = static_cast<int>(std::ceil(0.5 * n));
    int flip = 0;
    for (int i = 1; i <= 3 * n && !flip; ++i)
      if (s.update(t += dt, 1 - base, 1 - base) != steady) flip = i;
    latency_fail += flip == 0 || flip > need || flip * dt > 1.0;
    worst_time = std::max(worst_time, flip * dt);
  }
  return {glitch_fail == 0 && latency_fail == 0,
          fmt("1000 random streams: glitch flips %d, flips later than ceil(N/2) samples or 1 s %d, worst flip %.3f s",
              glitch_fail, latency_fail, worst_time)};
}

// ---- 8 --------------------------------------------------------------------

Outcome scenario_replays() {
  const auto& c = default_corpus();
  const auto model = models::train(models::KnnSpec{11}, c.dataset.data, models::FeatureMask::all(), c.dataset.scaling);
  double worst_ratio = 0.0, worst_collision = 0.0;
  bool deterministic = true;
  for (std::uint64_t seed = 101; seed <= 110; ++seed) {
    sim::ScenarioSpec spec;
    spec.kind = sim::ScenarioKind::Distracted;
    spec.seed = seed;
    const auto trace = sim::generate(spec, scene());
    const auto on = replay::run_replay(trace, model, scene(), {true, std::nullopt});
    const auto off = replay::run_replay(trace, model, scene(), {false, std::nullopt});
    worst_ratio = std::max(worst_ratio, on.verdict.deviation / off.verdict.deviation);
    if (seed == 101) {
      const auto again = replay::run_replay(trace, model, scene(), {true, std::nullopt});
      for (std::size_t i = 0; i < again.log.records.size(); ++i)
        deterministic = deterministic && again.log.records[i].ee == on.log.records[i].ee;
    }
  }
  for (std::uint64_t seed = 201; seed <= 210; ++seed) {
    sim::ScenarioSpec spec;
    spec.kind = sim::ScenarioKind::Collision;
    spec.seed = seed;
    const auto r = replay::run_replay(sim::generate(spec, scene()), model, scene(), {true, std::nullopt});
    worst_collision = std::max(worst_collision, r.verdict.deviation);
  }
  return {worst_ratio <= 0.20 && worst_collision <= 0.05 && deterministic,
          fmt("distracted seeds 101-110: worst controlled/uncontrolled deviation %.3f; collision seeds 201-210: "
              "worst deviation %.4f m; repeat run identical: %s",
              worst_ratio, worst_collision, deterministic ? "yes" : "no")};
}

// ---- 9 --------------------------------------------------------------------

Outcome latency() {
  // Exactly 3002 stored rows: the default corpus topped up from another seed.
  auto data = default_corpus().dataset.data;
  const auto extra = corpus_for(9);
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; data.size() + rows.size() < 3002; ++i) rows.push_back(i);
  data.append(extra.dataset.data.subset(rows));
  while (data.size() > 3002) {
    data.x.pop_back();
    data.y.pop_back();
    data.group.pop_back();
  }
  const auto model =
      models::train(models::KnnSpec{11}, data, models::FeatureMask::all(), default_corpus().dataset.scaling);

  std::vector<TraceFrame> frames;
  double offset = 0.0;
  for (std::uint64_t seed = 1; frames.size() < 1000; ++seed) {
    sim::ScenarioSpec spec;
    spec.kind = static_cast<sim::ScenarioKind>(seed % 5);
    spec.seed = 900 + seed;
    for (auto f : sim::generate(spec, scene()).frames) {
      f.t += offset;
      frames.push_back(std::move(f));
    }
    offset = frames.back().t + 0.1;
  }
  frames.resize(1000);

  pipeline::Pipeline p(scene(), model);
  double total = 0.0, worst = 0.0;
  for (const auto& f : frames) {
    const auto t0 = Clock::now();
    p.step(f);
    const double ms = 1e3 * seconds_since(t0);
    total += ms;
    worst = std::max(worst, ms);
  }
  const double mean = total / frames.size();
  return {data.size() == 3002 && mean < 8.4 && worst < 15.0,
          fmt("%zu stored rows, 1000 frames: mean %.3f ms, max %.3f ms", data.size(), mean, worst)};
}

// ---- 10 -------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const fs::path& dir, const std::string& args) {
  const std::string cmd = "cd " + dir.string() + " && " + INTENT_CLI_PATH + " " + args + " > stdout.txt 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

Outcome round_trip_and_determinism() {
  const auto root = fs::temp_directory_path() / "intent_acceptance";
  fs::remove_all(root);
  fs::create_directories(root);

  int exact = 0;
  const auto& c = default_corpus();
  for (std::size_t i = 0; i < c.traces.size(); ++i) {
    const auto p = root / ("t" + std::to_string(i) + ".jsonl");
    traces::write_trace(p, c.traces[i]);
    const auto back = traces::read_trace(p);
    exact += traces::same_trace(back, c.traces[i]) && traces::serialize_trace(back) == slurp(p);
  }

  const std::vector<std::pair<std::string, std::string>> commands{
      {"gen --spec ../corpus.json --out corpus", ""},
      {"gen --spec ../dist.json --out dist.jsonl", "dist.jsonl"},
      {"gen --spec ../dist.json --seed 77 --out dist77.jsonl", "dist77.jsonl"},
      {"train --traces 'corpus/*.jsonl' --out knn.json", "knn.json"},
      {"train --traces 'corpus/*.jsonl' --model mlp --epochs 300 --seed 3 --out mlp.json", "mlp.json"},
      {"eval --traces 'corpus/*.jsonl' --retrain --seed 2 --out eval.json", "eval.json"},
      {"eval --traces 'corpus/*.jsonl' --model mlp.json --out eval_mlp.json", "eval_mlp.json"},
      {"ablate --traces 'corpus/*.jsonl' --seed 2 --out ablate.json", "ablate.json"},
      {"replay --trace dist.jsonl --model knn.json --control --out replay.jsonl", "replay.jsonl"},
      {"export-plot --log replay.jsonl --out plot.csv", "plot.csv"},
  };
  std::ofstream(root / "corpus.json") << sim::mix_to_json({});
  std::ofstream(root / "dist.json") << R"({"kind": "distracted", "seed": 5})";

  std::vector<std::map<std::string, std::string>> hashes(2);
  bool all_ok = true;
  for (int run = 0; run < 2; ++run) {
    const auto dir = root / ("run" + std::to_string(run));
    fs::create_directories(dir);
    for (const auto& [args, out] : commands) {
      all_ok = all_ok && run_cli(dir, args) == 0;
      if (!out.empty()) hashes[static_cast<std::size_t>(run)][out] = hex64(fnv1a64(slurp(dir / out)));
    }
    for (const auto& e : fs::directory_iterator(dir / "corpus"))
      hashes[static_cast<std::size_t>(run)]["corpus/" + e.path().filename().string()] = hex64(fnv1a64(slurp(e.path())));
  }
  const bool same = hashes[0] == hashes[1];
  return {exact == static_cast<int>(c.traces.size()) && all_ok && same,
          fmt("%d of %zu traces round-trip bit-exactly; %zu CLI outputs from two runs: %s", exact, c.traces.size(),
              hashes[0].size(), same && all_ok ? "identical hashes" : "MISMATCH or failed command")};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"accuracy identity and reference row", accuracy_identity},
      {"ablation ordering", ablation_ordering},
      {"TS-only degeneracy", ts_only_degeneracy},
      {"kNN oracle equivalence", knn_oracle},
      {"MLP gradient check", gradient_check},
      {"feature invariants", feature_invariants},
      {"smoothing bounds", smoothing_bounds},
      {"scenario replays", scenario_replays},
      {"latency", latency},
      {"round-trip and determinism", round_trip_and_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    const auto t0 = Clock::now();
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("criterion %2zu %s  %s: %s (%.1f s)\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first,
                o.detail.c_str(), seconds_since(t0));
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
