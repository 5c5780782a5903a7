// Command-line entry point: gen, train, eval, ablate, replay, export-plot.
//
// Exit codes: 0 success, 1 runtime or model error, 2 usage or config error.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "intent/config.hpp"
#include "intent/evaluation.hpp"
#include "intent/replay.hpp"
#include "intent/simgen.hpp"
#include "intent/traces.hpp"

namespace fs = std::filesystem;
using namespace intent;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct UsageError : Error {
  using Error::Error;
};

SceneConfig load_config(const std::string& flag) {
  if (!flag.empty()) return load_scene(flag);
  if (const char* env = std::getenv("CONFIG_PATH"); env && *env) return load_scene(env);
  return SceneConfig::demo();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw Error("cannot write " + p.string());
  out << text;
}

bool is_corpus_file(const std::string& text) {
  return text.find("\"mix\"") != std::string::npos || text.find("\"scenarios\"") != std::string::npos;
}

models::FeatureMask parse_mask(const std::string& s) {
  try {
    return models::FeatureMask::parse(s);
  } catch (const ParameterError& e) {
    throw UsageError(e.what());
  }
}

void check_k(int k) {
  if (k < 1 || k % 2 == 0) throw UsageError("--k must be a positive odd integer");
}

models::ModelSpec model_spec(const std::string& kind, int k, std::uint64_t seed, int epochs) {
  if (kind == "knn") {
    check_k(k);
    return models::KnnSpec{k};
  }
  if (kind == "mlp") {
    models::MlpSpec m;
    m.options.seed = seed;
    if (epochs > 0) m.options.epochs = epochs;
    return m;
  }
  throw UsageError("model kind must be knn or mlp");
}

traces::AssembledDataset load_dataset(const std::vector<std::string>& globs, const SceneConfig& scene,
                                      const std::optional<features::ScalingParams>& scaling = std::nullopt) {
  const auto paths = traces::expand_globs(globs);
  return traces::assemble_dataset(paths, scene, scaling);
}

// ---- subcommands -----------------------------------------------------------

struct GenArgs {
  std::string spec;
  std::string out;
  std::optional<std::uint64_t> seed;
};

int run_gen(const GenArgs& a, const SceneConfig& scene) {
  const std::string text = slurp(a.spec);
  if (is_corpus_file(text)) {
    auto specs = sim::corpus_from_json(text);
    if (a.seed)
      for (std::size_t i = 0; i < specs.size(); ++i) specs[i].seed = *a.seed * 1000003ULL + i + 1;
    const auto corpus = sim::build_corpus(specs, scene);
    fs::create_directories(a.out);
    for (std::size_t i = 0; i < corpus.traces.size(); ++i) {
      char name[64];
      std::snprintf(name, sizeof name, "trace_%03zu_%s.jsonl", i,
                    std::string(sim::kind_name(specs[i].kind)).c_str());
      traces::write_trace(fs::path(a.out) / name, corpus.traces[i]);
    }
    const auto total = corpus.dataset.data.size();
    std::printf("traces=%zu, frames=%zu, positives=%zu, positive_fraction=%.4f\n", corpus.traces.size(), total,
                corpus.positives, static_cast<double>(corpus.positives) / static_cast<double>(total));
    return 0;
  }
  auto spec = sim::spec_from_json(text);
  if (a.seed) spec.seed = *a.seed;
  const auto trace = sim::generate(spec, scene);
  traces::write_trace(a.out, trace);
  std::size_t positives = 0;
  for (const auto& f : trace.frames) positives += f.label.value_or(0) == 1;
  std::printf("frames=%zu, positives=%zu\n", trace.frames.size(), positives);
  return 0;
}

struct TrainArgs {
  std::vector<std::string> traces;
  std::string model = "knn";
  int k = 11;
  std::string features = "TS,HP,HS,GA,GS";
  std::string out;
  std::uint64_t seed = 1;
  int epochs = 0;
};

int run_train(const TrainArgs& a, const SceneConfig& scene) {
  const auto mask = parse_mask(a.features);
  const auto spec = model_spec(a.model, a.k, a.seed, a.epochs);
  const auto ds = load_dataset(a.traces, scene);
  traces::ModelFile mf;
  mf.model = models::train(spec, ds.data, mask, ds.scaling);
  mf.seed = a.seed;
  mf.corpus_hash = ds.corpus_hash;
  mf.scene_id = scene.id();
  mf.training_rows = ds.data.size();
  traces::save_model(a.out, mf);
  const auto cm = models::evaluate(mf.model, ds.data);
  std::printf("model=%s features=%s rows=%zu training_accuracy=%.4f\n", models::model_name(spec).c_str(),
              mask.to_string().c_str(), ds.data.size(), cm.accuracy());
  return 0;
}

struct EvalArgs {
  std::vector<std::string> traces;
  std::string model;
  bool retrain = false;
  std::string kind = "knn";
  int k = 11;
  std::string features = "TS,HP,HS,GA,GS";
  int folds = 5;
  std::uint64_t seed = 1;
  int epochs = 0;
  std::string out = "eval_report.json";
};

int run_eval(const EvalArgs& a, const SceneConfig& scene) {
  if (a.retrain == !a.model.empty()) throw UsageError("eval needs exactly one of --model or --retrain");
  traces::EvalReport report;
  report.config_hash = hex64(fnv1a64(to_json(scene)));
  if (a.retrain) {
    if (a.folds < 2) throw UsageError("--folds must be at least 2");
    const auto mask = parse_mask(a.features);
    const auto spec = model_spec(a.kind, a.k, a.seed, a.epochs);
    const auto ds = load_dataset(a.traces, scene);
    const auto cv = models::cross_validate(ds.data, mask, spec, a.folds, a.seed);
    report.rows.push_back(traces::report_row(models::model_name(spec), mask, cv));
    report.corpus_hash = ds.corpus_hash;
    report.frames = ds.data.size();
    report.positives = ds.data.positives();
  } else {
    const auto mf = traces::load_model(a.model);
    const auto ds = load_dataset(a.traces, scene, models::scaling_of(mf.model));
    const auto cm = models::evaluate(mf.model, ds.data);
    std::string name;
    if (const auto* k = std::get_if<models::KnnModel>(&mf.model))
      name = models::model_name(models::KnnSpec{k->k});
    else
      name = models::model_name(models::MlpSpec{});
    report.rows.push_back(traces::report_row(name, models::mask_of(mf.model), cm));
    report.rows.back().seed = mf.seed;
    report.corpus_hash = ds.corpus_hash;
    report.frames = ds.data.size();
    report.positives = ds.data.positives();
  }
  const std::string json = traces::report_to_json(report);
  write_text(a.out, json + "\n");
  std::fputs(traces::format_report(report).c_str(), stdout);
  std::printf("report_hash=%s\n", hex64(fnv1a64(json)).c_str());
  return 0;
}

struct AblateArgs {
  std::vector<std::string> traces;
  std::vector<std::string> masks;
  std::string kind = "knn";
  int k = 11;
  int folds = 5;
  std::uint64_t seed = 1;
  int epochs = 0;
  std::string out;
};

int run_ablate(const AblateArgs& a, const SceneConfig& scene) {
  std::vector<models::FeatureMask> masks;
  for (const auto& m : a.masks) masks.push_back(parse_mask(m));
  if (masks.empty()) masks = models::ablation_presets();
  const auto spec = model_spec(a.kind, a.k, a.seed, a.epochs);
  const auto ds = load_dataset(a.traces, scene);
  const auto rows = models::ablation_study(ds.data, masks, {spec}, a.folds, a.seed);
  traces::EvalReport report;
  report.config_hash = hex64(fnv1a64(to_json(scene)));
  report.corpus_hash = ds.corpus_hash;
  report.frames = ds.data.size();
  report.positives = ds.data.positives();
  for (const auto& r : rows) report.rows.push_back(traces::report_row(r.model, r.mask, r.result));
  const std::string json = traces::report_to_json(report);
  if (!a.out.empty()) write_text(a.out, json + "\n");
  std::fputs(traces::format_report(report).c_str(), stdout);
  std::printf("report_hash=%s\n", hex64(fnv1a64(json)).c_str());
  return 0;
}

struct ReplayArgs {
  std::string trace;
  std::string model;
  bool control = false;
  std::optional<double> window;
  std::string out = "replay_log.jsonl";
};

int run_replay(const ReplayArgs& a, const SceneConfig& scene) {
  if (a.window && !(*a.window > 0.0)) throw UsageError("--window must be positive");
  const auto trace = traces::read_trace(a.trace);
  const auto mf = traces::load_model(a.model);
  replay::ReplayOptions opt;
  opt.control = a.control;
  opt.window = a.window;
  const auto result = replay::run_replay(trace, mf.model, scene, opt);
  traces::write_replay_log(a.out, result.log);
  std::printf("%s\n", result.verdict.summary.c_str());
  return 0;
}

struct ExportArgs {
  std::string log;
  std::string out;
};

int run_export(const ExportArgs& a) {
  const auto log = traces::read_replay_log(a.log);
  write_text(a.out, traces::replay_csv(log));
  std::printf("rows=%zu\n", log.records.size());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Touch intention recognition: scenario generation, training, evaluation and replay"};
  app.require_subcommand(1, 1);
  std::string config;
  app.add_option("--config", config, "Scene config file (default: $CONFIG_PATH, then the built-in demo scene)");

  GenArgs gen;
  auto* c_gen = app.add_subcommand("gen", "Generate a trace from a scenario spec, or a corpus from a corpus file");
  c_gen->add_option("--spec", gen.spec, "Scenario spec or corpus file")->required();
  c_gen->add_option("--out", gen.out, "Trace file (or directory for a corpus)")->required();
  c_gen->add_option("--seed", gen.seed, "Override the spec seed");

  TrainArgs train;
  auto* c_train = app.add_subcommand("train", "Train a classifier on labeled traces");
  c_train->add_option("--traces", train.traces, "Trace file patterns")->required();
  c_train->add_option("--model", train.model, "knn or mlp")->check(CLI::IsMember({"knn", "mlp"}));
  c_train->add_option("--k", train.k, "Neighbours for knn (odd)");
  c_train->add_option("--features", train.features, "Feature flags, e.g. TS,HP,HS,GA,GS");
  c_train->add_option("--out", train.out, "Model file")->required();
  c_train->add_option("--seed", train.seed, "Network initialization seed");
  c_train->add_option("--epochs", train.epochs, "Network training epochs");

  EvalArgs ev;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a model file, or cross-validate a fresh model");
  c_eval->add_option("--traces", ev.traces, "Trace file patterns")->required();
  auto* o_model = c_eval->add_option("--model", ev.model, "Model file to evaluate");
  auto* o_retrain = c_eval->add_flag("--retrain", ev.retrain, "Cross-validate a freshly trained model");
  o_model->excludes(o_retrain);
  c_eval->add_option("--kind", ev.kind, "Model kind for --retrain: knn or mlp")->check(CLI::IsMember({"knn", "mlp"}));
  c_eval->add_option("--k", ev.k, "Neighbours for knn (odd)");
  c_eval->add_option("--features", ev.features, "Feature flags for --retrain");
  c_eval->add_option("--folds", ev.folds, "Cross-validation folds");
  c_eval->add_option("--seed", ev.seed, "Fold shuffle seed");
  c_eval->add_option("--epochs", ev.epochs, "Network training epochs");
  c_eval->add_option("--out", ev.out, "Report file");

  AblateArgs ab;
  auto* c_ablate = app.add_subcommand("ablate", "Cross-validate a model over feature subsets");
  c_ablate->add_option("--traces", ab.traces, "Trace file patterns")->required();
  c_ablate->add_option("--masks", ab.masks, "Feature subsets, e.g. --masks TS,HP TS (default: the seven presets)");
  c_ablate->add_option("--model", ab.kind, "knn or mlp")->check(CLI::IsMember({"knn", "mlp"}));
  c_ablate->add_option("--k", ab.k, "Neighbours for knn (odd)");
  c_ablate->add_option("--folds", ab.folds, "Cross-validation folds");
  c_ablate->add_option("--seed", ab.seed, "Fold shuffle seed");
  c_ablate->add_option("--epochs", ab.epochs, "Network training epochs");
  c_ablate->add_option("--out", ab.out, "Report file");

  ReplayArgs rp;
  auto* c_replay = app.add_subcommand("replay", "Run the pipeline and controller over a trace");
  c_replay->add_option("--trace", rp.trace, "Trace file")->required();
  c_replay->add_option("--model", rp.model, "Model file")->required();
  c_replay->add_flag("--control", rp.control, "Enable the safety stop");
  c_replay->add_option("--window", rp.window, "Smoothing window span, s");
  c_replay->add_option("--out", rp.out, "Replay log file");

  ExportArgs ex;
  auto* c_export = app.add_subcommand("export-plot", "Write a replay log as CSV for plotting");
  c_export->add_option("--log", ex.log, "Replay log file")->required();
  c_export->add_option("--out", ex.out, "CSV file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (c_export->parsed()) return run_export(ex);
    const SceneConfig scene = load_config(config);
    if (c_gen->parsed()) return run_gen(gen, scene);
    if (c_train->parsed()) return run_train(train, scene);
    if (c_eval->parsed()) return run_eval(ev, scene);
    if (c_ablate->parsed()) return run_ablate(ab, scene);
    if (c_replay->parsed()) return run_replay(rp, scene);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return kExitUsage;
}
