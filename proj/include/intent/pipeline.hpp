#pragma once

#include <deque>
#include <mutex>
#include <optional>

#include "intent/config.hpp"
#include "intent/evaluation.hpp"
#include "intent/features.hpp"
#include "intent/frame.hpp"

namespace intent::pipeline {

struct WindowSample {
  double t = 0.0;
  int label = 0;
};

// Time-based moving average over raw binary classifier outputs. The window
// keeps samples with t > newest - span; intention is Intentional only when the
// mean is strictly above the threshold.
class IntentionState {
public:
  explicit IntentionState(double span = 1.0, double threshold = 0.5);

  // Throws StreamOrderError if t does not advance.
  Intention update(double t, int raw_label, double raw_score);
  void reset();

  double span() const { return span_; }
  double threshold() const { return threshold_; }
  double raw_score() const { return raw_score_; }
  double smoothed() const;
  std::size_t count() const;  // samples averaged: the window size, rounded down to odd
  Intention intention() const { return intention_; }
  std::optional<double> last_transition() const { return last_transition_; }
  const std::deque<WindowSample>& window() const { return window_; }

private:
  double span_;
  double threshold_;
  std::deque<WindowSample> window_;
  int positives_ = 0;
  double raw_score_ = 0.0;
  Intention intention_ = Intention::Unintentional;
  std::optional<double> last_transition_;
};

// Per-frame geometry handed to the feature layer. If the skeleton fails
// validation both wrists are dropped (no hand is near any sensor, so d' = 1 and
// no hand gaze target exists); the gaze ray is kept.
struct Observation {
  features::FrameInputs inputs;
  perception::SkeletonCheck skeleton;
};

Observation observe(const SceneConfig& scene, const TraceFrame& frame);

struct StepResult {
  double t = 0.0;
  features::FeatureVector features;
  int raw = 0;
  double score = 0.0;
  double smoothed = 0.0;
  Intention intention = Intention::Unintentional;
  bool skeleton_ok = true;
};

// One interaction stream. step() is single-writer; latest() may be called from
// any thread and sees either the previous or the new result, never a mix.
class Pipeline {
public:
  Pipeline(SceneConfig scene, models::Classifier model);

  StepResult step(const TraceFrame& frame);
  void reset();

  std::optional<StepResult> latest() const;
  Intention latest_intention() const;

  const SceneConfig& scene() const { return scene_; }
  const models::Classifier& model() const { return model_; }
  const IntentionState& state() const { return state_; }

private:
  SceneConfig scene_;
  models::Classifier model_;
  features::FeatureStreamState stream_;
  IntentionState state_;
  mutable std::mutex publish_mu_;
  std::optional<StepResult> latest_;
};

}  // namespace intent::pipeline
