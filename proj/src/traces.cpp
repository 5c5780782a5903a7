#include "intent/traces.hpp"

#include <glob.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "intent/pipeline.hpp"

namespace intent::traces {

using nlohmann::json;
using perception::Joint;
using perception::kJointCount;

namespace {

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Eigen::VectorXd vec_from(const json& j) {
  if (!j.is_array()) throw TraceFormatError("expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TraceError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw TraceError("cannot write " + path.string());
  out << text;
  if (!out) throw TraceError("write failed for " + path.string());
}

json header_json(const TraceHeader& h, const char* kind) {
  json j;
  j["format_version"] = h.format_version;
  j["kind"] = kind;
  j["scene_id"] = h.scene_id;
  j["sensors"] = h.sensors;
  j["arms"] = h.arms;
  j["dof"] = h.dof;
  j["pois"] = h.pois;
  j["frame_rate"] = h.frame_rate;
  if (h.scenario) j["scenario"] = json::parse(sim::to_json(*h.scenario));
  return j;
}

TraceHeader header_from(const std::string& line, const char* kind) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception&) {
    throw TraceVersionError("unreadable header: no recognizable format_version");
  }
  if (!j.is_object() || !j.contains("format_version") || !j["format_version"].is_number_integer())
    throw TraceVersionError("header has no format_version");
  const int version = j["format_version"].get<int>();
  if (version != kTraceFormatVersion)
    throw TraceVersionError("unsupported trace format_version " + std::to_string(version));
  try {
    if (j.at("kind").get<std::string>() != kind)
      throw TraceFormatError("expected a '" + std::string(kind) + "' file, found '" +
                             j.at("kind").get<std::string>() + "'");
    TraceHeader h;
    h.format_version = version;
    h.scene_id = j.at("scene_id").get<std::string>();
    h.sensors = j.at("sensors").get<std::size_t>();
    h.arms = j.at("arms").get<std::size_t>();
    h.dof = j.at("dof").get<std::size_t>();
    h.pois = j.at("pois").get<std::vector<std::string>>();
    h.frame_rate = j.at("frame_rate").get<double>();
    if (j.contains("scenario")) h.scenario = sim::spec_from_json(j["scenario"].dump());
    return h;
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("malformed header: ") + e.what());
  } catch (const ConfigError& e) {
    throw TraceFormatError(std::string("malformed scenario in header: ") + e.what());
  }
}

json frame_json(const TraceFrame& f) {
  json j;
  j["t"] = f.t;
  std::string bits(f.gamma.size(), '0');
  for (std::size_t i = 0; i < f.gamma.size(); ++i) bits[i] = f.gamma[i] ? '1' : '0';
  j["gamma"] = bits;
  json kps = json::object();
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto& kp = f.skeleton.keypoints[i];
    json d = kp.depth ? json(*kp.depth) : json(nullptr);
    kps[std::string(perception::joint_name(static_cast<Joint>(i)))] = {kp.u, kp.v, kp.confidence, d};
  }
  j["keypoints"] = kps;
  if (f.gaze)
    j["gaze"] = {{"origin", {f.gaze->origin.x(), f.gaze->origin.y()}},
                 {"direction", {f.gaze->direction.x(), f.gaze->direction.y()}}};
  json q = json::array();
  for (const auto& v : f.q) q.push_back(vec_json(v));
  j["q"] = q;
  if (f.label) j["label"] = *f.label;
  if (f.push) j["push"] = {{"arm", f.push->arm}, {"target", vec_json(f.push->target)}};
  return j;
}

TraceFrame frame_from(const json& j) {
  TraceFrame f;
  f.t = j.at("t").get<double>();
  const auto bits = j.at("gamma").get<std::string>();
  f.gamma.resize(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] != '0' && bits[i] != '1') throw TraceFormatError("gamma must be a string of 0/1");
    f.gamma[i] = bits[i] == '1';
  }
  const auto& kps = j.at("keypoints");
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto& a = kps.at(std::string(perception::joint_name(static_cast<Joint>(i))));
    auto& kp = f.skeleton.keypoints[i];
    kp.u = a.at(0).get<double>();
    kp.v = a.at(1).get<double>();
    kp.confidence = a.at(2).get<double>();
    if (!a.at(3).is_null()) kp.depth = a.at(3).get<double>();
  }
  if (j.contains("gaze")) {
    const auto& g = j["gaze"];
    // Stored direction is already unit length; keep the bits as written.
    perception::GazeEstimate ge;
    ge.origin = {g.at("origin").at(0).get<double>(), g.at("origin").at(1).get<double>()};
    ge.direction = {g.at("direction").at(0).get<double>(), g.at("direction").at(1).get<double>()};
    f.gaze = ge;
  }
  for (const auto& v : j.at("q")) f.q.push_back(vec_from(v));
  if (j.contains("label")) f.label = j["label"].get<int>();
  if (j.contains("push")) f.push = Push{j["push"].at("arm").get<int>(), vec_from(j["push"].at("target"))};
  return f;
}

// Splits a line-oriented file into its header and record lines, reporting a
// missing final newline as truncation.
std::vector<std::string> split_records(const std::string& text) {
  if (text.empty()) throw TraceTruncatedError("empty file: header missing");
  if (text.back() != '\n') throw TraceTruncatedError("last record is incomplete");
  std::vector<std::string> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const auto nl = text.find('\n', pos);
    lines.push_back(text.substr(pos, nl - pos));
    pos = nl + 1;
  }
  return lines;
}

json parse_record(const std::string& line, std::size_t index, std::size_t count) {
  try {
    return json::parse(line);
  } catch (const json::exception& e) {
    if (index + 1 == count) throw TraceTruncatedError("last record is incomplete");
    throw TraceFormatError("record " + std::to_string(index) + " is not valid JSON");
  }
}

void check_order(double prev, double t, std::size_t index) {
  if (!std::isfinite(t)) throw TraceFormatError("record " + std::to_string(index) + " has a non-finite timestamp");
  if (index > 0 && !(t > prev))
    throw TraceOrderError("timestamps not strictly increasing at record " + std::to_string(index));
}

const char* mode_name(control::Mode m) { return m == control::Mode::Compliant ? "compliant" : "stiff"; }

}  // namespace

TraceHeader make_header(const SceneConfig& scene, double frame_rate) {
  TraceHeader h;
  h.scene_id = scene.id();
  h.sensors = scene.layout.count();
  h.arms = scene.arms.size();
  h.dof = scene.arms.empty() ? 0 : scene.arms.front().chain.dof();
  for (const auto& p : scene.pois) h.pois.push_back(p.name);
  h.frame_rate = frame_rate;
  return h;
}

bool same_frame(const TraceFrame& a, const TraceFrame& b) {
  if (a.t != b.t || a.gamma != b.gamma || a.label != b.label || a.push != b.push) return false;
  if (a.q.size() != b.q.size()) return false;
  for (std::size_t i = 0; i < a.q.size(); ++i)
    if (a.q[i].size() != b.q[i].size() || a.q[i] != b.q[i]) return false;
  if (a.gaze.has_value() != b.gaze.has_value()) return false;
  if (a.gaze && (a.gaze->origin != b.gaze->origin || a.gaze->direction != b.gaze->direction)) return false;
  for (std::size_t i = 0; i < kJointCount; ++i) {
    const auto& x = a.skeleton.keypoints[i];
    const auto& y = b.skeleton.keypoints[i];
    if (x.u != y.u || x.v != y.v || x.confidence != y.confidence || x.depth != y.depth) return false;
  }
  return true;
}

bool same_trace(const Trace& a, const Trace& b) {
  if (!(a.header == b.header) || a.frames.size() != b.frames.size()) return false;
  for (std::size_t i = 0; i < a.frames.size(); ++i)
    if (!same_frame(a.frames[i], b.frames[i])) return false;
  return true;
}

std::string frame_to_json(const TraceFrame& f) { return frame_json(f).dump(); }

TraceFrame frame_from_json(const std::string& line) {
  try {
    return frame_from(json::parse(line));
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("malformed frame: ") + e.what());
  }
}

std::string serialize_trace(const Trace& trace) {
  std::string out = header_json(trace.header, "trace").dump() + "\n";
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    check_order(i ? trace.frames[i - 1].t : 0.0, trace.frames[i].t, i);
    out += frame_json(trace.frames[i]).dump();
    out += '\n';
  }
  return out;
}

void write_trace(const std::filesystem::path& path, const Trace& trace) {
  write_file(path, serialize_trace(trace));
}

Trace parse_trace(const std::string& text) {
  const auto lines = split_records(text);
  Trace trace;
  trace.header = header_from(lines.front(), "trace");
  trace.frames.reserve(lines.size() - 1);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json j = parse_record(lines[i], i, lines.size());
    TraceFrame f;
    try {
      f = frame_from(j);
    } catch (const json::exception& e) {
      throw TraceFormatError("record " + std::to_string(i) + ": " + e.what());
    }
    check_order(trace.frames.empty() ? 0.0 : trace.frames.back().t, f.t, trace.frames.size());
    trace.frames.push_back(std::move(f));
  }
  return trace;
}

Trace read_trace(const std::filesystem::path& path) { return parse_trace(read_file(path)); }

std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns) {
  std::set<std::filesystem::path> found;
  for (const auto& p : patterns) {
    glob_t g{};
    const int rc = ::glob(p.c_str(), 0, nullptr, &g);
    if (rc == GLOB_NOMATCH || (rc == 0 && g.gl_pathc == 0)) {
      globfree(&g);
      throw CorpusError("no files match '" + p + "'");
    }
    if (rc != 0) {
      globfree(&g);
      throw CorpusError("cannot expand '" + p + "'");
    }
    for (std::size_t i = 0; i < g.gl_pathc; ++i) found.insert(g.gl_pathv[i]);
    globfree(&g);
  }
  return {found.begin(), found.end()};
}

AssembledDataset assemble_dataset(const std::vector<Trace>& traces, const SceneConfig& scene,
                                  const std::optional<features::ScalingParams>& scaling) {
  if (traces.empty()) throw CorpusError("no traces to assemble");
  const auto expected = make_header(scene, 0.0);
  std::vector<std::vector<features::FrameMeasurements>> streams(traces.size());
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    const auto& tr = traces[ti];
    if (tr.header.sensors != expected.sensors || tr.header.arms != expected.arms || tr.header.dof != expected.dof)
      throw CorpusError("trace " + std::to_string(ti) + " was recorded for a different robot layout");
    if (tr.header.scene_id != traces.front().header.scene_id)
      throw CorpusError("traces come from different scene configurations");
    hash = fnv1a64(serialize_trace(tr), hash);
    auto& ms = streams[ti];
    ms.reserve(tr.frames.size());
    for (const auto& f : tr.frames) {
      if (!f.label) throw CorpusError("trace " + std::to_string(ti) + " has unlabeled frames");
      ms.push_back(features::measure(pipeline::observe(scene, f).inputs));
    }
  }
  AssembledDataset out;
  out.scaling = scaling ? *scaling : features::fit_scaling(streams);
  out.corpus_hash = hex64(hash);
  for (std::size_t ti = 0; ti < traces.size(); ++ti) {
    features::FeatureStreamState state;
    for (std::size_t i = 0; i < streams[ti].size(); ++i) {
      out.data.x.push_back(features::reduce(streams[ti][i], out.scaling, state));
      out.data.y.push_back(*traces[ti].frames[i].label ? 1 : 0);
      out.data.group.push_back(static_cast<int>(ti));
    }
  }
  return out;
}

AssembledDataset assemble_dataset(const std::vector<std::filesystem::path>& paths, const SceneConfig& scene,
                                  const std::optional<features::ScalingParams>& scaling) {
  std::vector<Trace> traces;
  traces.reserve(paths.size());
  for (const auto& p : paths) traces.push_back(read_trace(p));
  return assemble_dataset(traces, scene, scaling);
}

// ---- model container -------------------------------------------------------

namespace {

json scaling_json(const features::ScalingParams& s) {
  return {{"d_max", s.d_max},
          {"d_dot_max", s.d_dot_max},
          {"alpha_max", s.alpha_max},
          {"alpha_dot_max", s.alpha_dot_max},
          {"proximity_dot_max", s.proximity_dot_max}};
}

features::ScalingParams scaling_from(const json& j) {
  features::ScalingParams s;
  s.d_max = j.at("d_max").get<double>();
  s.d_dot_max = j.at("d_dot_max").get<double>();
  s.alpha_max = j.at("alpha_max").get<double>();
  s.alpha_dot_max = j.at("alpha_dot_max").get<double>();
  s.proximity_dot_max = j.at("proximity_dot_max").get<double>();
  features::validate(s);
  return s;
}

}  // namespace

std::string model_to_json(const ModelFile& m) {
  json j;
  j["format_version"] = kModelFormatVersion;
  j["seed"] = m.seed;
  j["corpus_hash"] = m.corpus_hash;
  j["scene_id"] = m.scene_id;
  j["training_rows"] = m.training_rows;
  if (const auto* k = std::get_if<models::KnnModel>(&m.model)) {
    j["kind"] = "knn";
    j["features"] = k->mask.to_string();
    j["k"] = k->k;
    j["dim"] = k->dim;
    j["rows"] = k->rows;
    j["labels"] = k->labels;
    j["scaling"] = scaling_json(k->scaling);
  } else {
    const auto& n = std::get<models::MlpModel>(m.model);
    j["kind"] = "mlp";
    j["features"] = n.mask.to_string();
    json w1 = json::array();
    for (Eigen::Index r = 0; r < n.w1.rows(); ++r) w1.push_back(vec_json(n.w1.row(r).transpose()));
    j["w1"] = w1;
    j["b1"] = vec_json(n.b1);
    j["w2"] = vec_json(n.w2);
    j["b2"] = n.b2;
    j["scaling"] = scaling_json(n.scaling);
  }
  return j.dump();
}

ModelFile model_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw TraceFormatError("model file is not valid JSON");
  }
  if (!j.contains("format_version") || !j["format_version"].is_number_integer() ||
      j["format_version"].get<int>() != kModelFormatVersion)
    throw TraceVersionError("unsupported model format_version");
  try {
    ModelFile m;
    m.seed = j.at("seed").get<std::uint64_t>();
    m.corpus_hash = j.at("corpus_hash").get<std::string>();
    m.scene_id = j.at("scene_id").get<std::string>();
    m.training_rows = j.at("training_rows").get<std::size_t>();
    const auto kind = j.at("kind").get<std::string>();
    const auto mask = models::FeatureMask::parse(j.at("features").get<std::string>());
    if (kind == "knn") {
      models::KnnModel k;
      k.mask = mask;
      k.k = j.at("k").get<int>();
      k.dim = j.at("dim").get<std::size_t>();
      k.rows = j.at("rows").get<std::vector<double>>();
      k.labels = j.at("labels").get<std::vector<std::uint8_t>>();
      k.scaling = scaling_from(j.at("scaling"));
      if (k.dim != mask.size() || k.rows.size() != k.dim * k.labels.size())
        throw TraceFormatError("kNN rows do not match the feature mask");
      if (k.k < 1 || k.k % 2 == 0 || static_cast<std::size_t>(k.k) > k.labels.size())
        throw TraceFormatError("kNN k must be odd and at most the number of rows");
      m.model = std::move(k);
    } else if (kind == "mlp") {
      models::MlpModel n;
      n.mask = mask;
      const auto& w1 = j.at("w1");
      const auto inputs = static_cast<Eigen::Index>(mask.size());
      if (w1.size() != static_cast<std::size_t>(models::kHiddenUnits))
        throw TraceFormatError("network hidden layer size mismatch");
      n.w1.resize(models::kHiddenUnits, inputs);
      for (Eigen::Index r = 0; r < models::kHiddenUnits; ++r) {
        const auto row = vec_from(w1[static_cast<std::size_t>(r)]);
        if (row.size() != inputs) throw TraceFormatError("network input size mismatch");
        n.w1.row(r) = row.transpose();
      }
      n.b1 = vec_from(j.at("b1"));
      n.w2 = vec_from(j.at("w2"));
      if (n.b1.size() != models::kHiddenUnits || n.w2.size() != models::kHiddenUnits)
        throw TraceFormatError("network hidden layer size mismatch");
      n.b2 = j.at("b2").get<double>();
      n.scaling = scaling_from(j.at("scaling"));
      m.model = std::move(n);
    } else {
      throw TraceFormatError("unknown model kind '" + kind + "'");
    }
    return m;
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("malformed model file: ") + e.what());
  } catch (const ParameterError& e) {
    throw TraceFormatError(std::string("malformed model file: ") + e.what());
  }
}

void save_model(const std::filesystem::path& path, const ModelFile& m) {
  write_file(path, model_to_json(m) + "\n");
}

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

// ---- evaluation report -----------------------------------------------------

ReportRow report_row(const std::string& model, const models::FeatureMask& mask, const models::CvResult& cv) {
  ReportRow r;
  r.model = model;
  r.mask = mask;
  r.confusion = cv.confusion;
  r.accuracy = cv.confusion.accuracy();
  r.mean_fold_accuracy = cv.mean_fold_accuracy;
  r.folds = cv.folds;
  r.seed = cv.seed;
  return r;
}

ReportRow report_row(const std::string& model, const models::FeatureMask& mask,
                     const models::ConfusionMatrix& cm) {
  ReportRow r;
  r.model = model;
  r.mask = mask;
  r.confusion = cm;
  r.accuracy = cm.accuracy();
  r.mean_fold_accuracy = r.accuracy;
  return r;
}

std::string report_to_json(const EvalReport& r) {
  json j;
  j["format_version"] = kReportFormatVersion;
  j["corpus_hash"] = r.corpus_hash;
  j["config_hash"] = r.config_hash;
  j["frames"] = r.frames;
  j["positives"] = r.positives;
  json rows = json::array();
  for (const auto& row : r.rows)
    rows.push_back({{"model", row.model},
                    {"features", row.mask.to_string()},
                    {"accuracy", row.accuracy},
                    {"mean_fold_accuracy", row.mean_fold_accuracy},
                    {"tp", row.confusion.tp},
                    {"tn", row.confusion.tn},
                    {"fp", row.confusion.fp},
                    {"fn", row.confusion.fn},
                    {"folds", row.folds},
                    {"seed", row.seed}});
  j["rows"] = rows;
  return j.dump(2);
}

EvalReport report_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception&) {
    throw TraceFormatError("report is not valid JSON");
  }
  if (!j.contains("format_version") || j["format_version"] != kReportFormatVersion)
    throw TraceVersionError("unsupported report format_version");
  try {
    EvalReport r;
    r.corpus_hash = j.at("corpus_hash").get<std::string>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.frames = j.at("frames").get<std::size_t>();
    r.positives = j.at("positives").get<std::size_t>();
    for (const auto& rj : j.at("rows")) {
      ReportRow row;
      row.model = rj.at("model").get<std::string>();
      row.mask = models::FeatureMask::parse(rj.at("features").get<std::string>());
      row.accuracy = rj.at("accuracy").get<double>();
      row.mean_fold_accuracy = rj.at("mean_fold_accuracy").get<double>();
      row.confusion = {rj.at("tp").get<std::int64_t>(), rj.at("tn").get<std::int64_t>(),
                       rj.at("fp").get<std::int64_t>(), rj.at("fn").get<std::int64_t>()};
      row.folds = rj.at("folds").get<int>();
      row.seed = rj.at("seed").get<std::uint64_t>();
      r.rows.push_back(row);
    }
    return r;
  } catch (const json::exception& e) {
    throw TraceFormatError(std::string("malformed report: ") + e.what());
  }
}

std::string format_report(const EvalReport& r) {
  std::string out = "corpus " + r.corpus_hash + "  config " + r.config_hash + "  frames " +
                    std::to_string(r.frames) + "  positives " + std::to_string(r.positives) + "\n";
  out += "model           | TS HP HS GA GS | acc    | TP TN FP FN\n";
  for (const auto& row : r.rows) {
    char name[32];
    std::snprintf(name, sizeof name, "%-15s | ", row.model.c_str());
    out += name + models::format_row(row.mask, row.confusion) + "\n";
  }
  return out;
}

// ---- replay log ------------------------------------------------------------

void write_replay_log(const std::filesystem::path& path, const ReplayLog& log) {
  if (log.frames.size() != log.records.size()) throw TraceFormatError("replay log frame/record count mismatch");
  json h = header_json(log.header, "replay");
  h["control"] = log.control;
  std::string out = h.dump() + "\n";
  for (std::size_t i = 0; i < log.frames.size(); ++i) {
    check_order(i ? log.frames[i - 1].t : 0.0, log.frames[i].t, i);
    const auto& r = log.records[i];
    json j = frame_json(log.frames[i]);
    const auto& f = r.features;
    j["replay"] = {{"features",
                    {f.gamma, f.d, f.d_dot, f.alpha, f.alpha_dot, f.proximity, f.proximity_dot}},
                   {"raw", r.raw},
                   {"score", r.score},
                   {"smoothed", r.smoothed},
                   {"intention", r.intention == Intention::Intentional ? 1 : 0},
                   {"mode", mode_name(r.mode)},
                   {"arm", r.arm},
                   {"q", vec_json(r.q)},
                   {"ee", {r.ee.x(), r.ee.y(), r.ee.z()}},
                   {"ee_velocity", {r.ee_velocity.x(), r.ee_velocity.y(), r.ee_velocity.z()}},
                   {"force", r.force}};
    out += j.dump();
    out += '\n';
  }
  write_file(path, out);
}

ReplayLog read_replay_log(const std::filesystem::path& path) {
  const auto lines = split_records(read_file(path));
  ReplayLog log;
  log.header = header_from(lines.front(), "replay");
  log.control = json::parse(lines.front()).value("control", false);
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const json j = parse_record(lines[i], i, lines.size());
    try {
      TraceFrame f = frame_from(j);
      check_order(log.frames.empty() ? 0.0 : log.frames.back().t, f.t, log.frames.size());
      const auto& rj = j.at("replay");
      ReplayRecord r;
      const auto fv = rj.at("features").get<std::vector<double>>();
      if (fv.size() != 7) throw TraceFormatError("replay features must have 7 entries");
      r.features = {fv[0], fv[1], fv[2], fv[3], fv[4], fv[5], fv[6]};
      r.raw = rj.at("raw").get<int>();
      r.score = rj.at("score").get<double>();
      r.smoothed = rj.at("smoothed").get<double>();
      r.intention = rj.at("intention").get<int>() ? Intention::Intentional : Intention::Unintentional;
      r.mode = rj.at("mode").get<std::string>() == "compliant" ? control::Mode::Compliant : control::Mode::Stiff;
      r.arm = rj.at("arm").get<int>();
      r.q = vec_from(rj.at("q"));
      const auto ee = rj.at("ee").get<std::vector<double>>();
      const auto ev = rj.at("ee_velocity").get<std::vector<double>>();
      if (ee.size() != 3 || ev.size() != 3) throw TraceFormatError("replay positions must be 3-vectors");
      r.ee = {ee[0], ee[1], ee[2]};
      r.ee_velocity = {ev[0], ev[1], ev[2]};
      r.force = rj.at("force").get<double>();
      log.frames.push_back(std::move(f));
      log.records.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw TraceFormatError("record " + std::to_string(i) + ": " + e.what());
    }
  }
  return log;
}

std::string replay_csv(const ReplayLog& log) {
  std::string out = "t,gamma,d,d_dot,alpha,alpha_dot,raw,smoothed,intention,ee_x,ee_y,ee_z,ee_speed,force\n";
  char buf[512];
  for (std::size_t i = 0; i < log.records.size(); ++i) {
    const auto& r = log.records[i];
    const auto& f = r.features;
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  log.frames[i].t, f.gamma, f.d, f.d_dot, f.alpha, f.alpha_dot, r.raw, r.smoothed,
                  r.intention == Intention::Intentional ? 1 : 0, r.ee.x(), r.ee.y(), r.ee.z(), r.ee_velocity.norm(),
                  r.force);
    out += buf;
  }
  return out;
}

}  // namespace intent::traces
