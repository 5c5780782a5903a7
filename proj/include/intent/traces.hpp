#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "intent/config.hpp"
#include "intent/control.hpp"
#include "intent/evaluation.hpp"
#include "intent/frame.hpp"
#include "intent/scenario.hpp"

namespace intent::traces {

inline constexpr int kTraceFormatVersion = 1;
inline constexpr int kModelFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

struct TraceError : Error {
  using Error::Error;
};
struct TraceVersionError : TraceError {
  using TraceError::TraceError;
};
struct TraceTruncatedError : TraceError {
  using TraceError::TraceError;
};
struct TraceOrderError : TraceError {
  using TraceError::TraceError;
};
struct TraceFormatError : TraceError {
  using TraceError::TraceError;
};

struct TraceHeader {
  int format_version = kTraceFormatVersion;
  std::string scene_id;
  std::size_t sensors = 0;
  std::size_t arms = 0;
  std::size_t dof = 0;
  std::vector<std::string> pois;
  double frame_rate = 15.0;
  std::optional<sim::ScenarioSpec> scenario;

  bool operator==(const TraceHeader&) const = default;
};

TraceHeader make_header(const SceneConfig& scene, double frame_rate);

struct Trace {
  TraceHeader header;
  std::vector<TraceFrame> frames;
};

bool same_frame(const TraceFrame& a, const TraceFrame& b);  // exact, field by field
bool same_trace(const Trace& a, const Trace& b);

std::string frame_to_json(const TraceFrame& f);
TraceFrame frame_from_json(const std::string& line);

// One header line then one frame per line. Throws TraceOrderError for
// non-increasing timestamps.
void write_trace(const std::filesystem::path& path, const Trace& trace);
std::string serialize_trace(const Trace& trace);
Trace read_trace(const std::filesystem::path& path);
Trace parse_trace(const std::string& text);

// Expands shell-style patterns. Results are sorted and de-duplicated; a
// pattern matching nothing raises CorpusError.
std::vector<std::filesystem::path> expand_globs(const std::vector<std::string>& patterns);

struct AssembledDataset {
  models::LabeledDataset data;
  features::ScalingParams scaling;
  std::string corpus_hash;
};

// Features are extracted per trace with fresh stream state. Scaling is fitted
// on these traces unless given. Throws CorpusError for unlabeled frames or
// traces whose headers do not match the scene.
AssembledDataset assemble_dataset(const std::vector<Trace>& traces, const SceneConfig& scene,
                                  const std::optional<features::ScalingParams>& scaling = std::nullopt);
AssembledDataset assemble_dataset(const std::vector<std::filesystem::path>& paths, const SceneConfig& scene,
                                  const std::optional<features::ScalingParams>& scaling = std::nullopt);

// ---- model container -------------------------------------------------------

struct ModelFile {
  models::Classifier model;
  std::uint64_t seed = 0;
  std::string corpus_hash;
  std::string scene_id;
  std::size_t training_rows = 0;
};

std::string model_to_json(const ModelFile& m);
ModelFile model_from_json(const std::string& text);  // throws TraceFormatError / TraceVersionError
void save_model(const std::filesystem::path& path, const ModelFile& m);
ModelFile load_model(const std::filesystem::path& path);

// ---- evaluation report -----------------------------------------------------

struct ReportRow {
  std::string model;
  models::FeatureMask mask;
  double accuracy = 0.0;
  double mean_fold_accuracy = 0.0;
  models::ConfusionMatrix confusion;
  int folds = 0;
  std::uint64_t seed = 0;
};

struct EvalReport {
  std::vector<ReportRow> rows;
  std::string corpus_hash;
  std::string config_hash;
  std::size_t frames = 0;
  std::size_t positives = 0;
};

ReportRow report_row(const std::string& model, const models::FeatureMask& mask, const models::CvResult& cv);
ReportRow report_row(const std::string& model, const models::FeatureMask& mask,
                     const models::ConfusionMatrix& cm);
std::string report_to_json(const EvalReport& r);
EvalReport report_from_json(const std::string& text);
// Plain-text table, confusion counts in TP TN FP FN order.
std::string format_report(const EvalReport& r);

// ---- replay log ------------------------------------------------------------

struct ReplayRecord {
  features::FeatureVector features;
  int raw = 0;
  double score = 0.0;
  double smoothed = 0.0;
  Intention intention = Intention::Unintentional;
  control::Mode mode = control::Mode::Stiff;
  int arm = 0;
  Eigen::VectorXd q;
  Vec3 ee = Vec3::Zero();
  Vec3 ee_velocity = Vec3::Zero();
  double force = 0.0;  // norm of the external joint torque, N m
};

struct ReplayLog {
  TraceHeader header;
  bool control = false;
  std::vector<TraceFrame> frames;
  std::vector<ReplayRecord> records;
};

void write_replay_log(const std::filesystem::path& path, const ReplayLog& log);
ReplayLog read_replay_log(const std::filesystem::path& path);

// Columns: t,gamma,d,d_dot,alpha,alpha_dot,raw,smoothed,intention,
// ee_x,ee_y,ee_z,ee_speed,force
std::string replay_csv(const ReplayLog& log);

}  // namespace intent::traces
