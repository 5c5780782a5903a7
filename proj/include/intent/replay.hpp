#pragma once

#include <optional>
#include <string>

#include "intent/config.hpp"
#include "intent/evaluation.hpp"
#include "intent/traces.hpp"

namespace intent::replay {

struct ReplayOptions {
  // With control the safety stop switches gains on intention changes; without
  // it the arm stays compliant around its initial configuration throughout.
  bool control = true;
  std::optional<double> window;  // overrides the scene's window span
};

struct Verdict {
  std::string scenario;                // scenario kind, or "unknown"
  std::optional<sim::Interval> interval;  // distraction or contact interval used
  double deviation = 0.0;              // max end-effector displacement, m
  double stiff_fraction = 0.0;         // share of interval frames in stiff mode
  std::string summary;
};

struct ReplayResult {
  traces::ReplayLog log;
  Verdict verdict;
};

// Runs the pipeline over the trace and closes the loop with the impedance
// controller on the pushed arm. The push in each frame is held until the next
// frame and applied through the scene's human push model.
ReplayResult run_replay(const traces::Trace& trace, const models::Classifier& model, const SceneConfig& scene,
                        const ReplayOptions& options = {});

}  // namespace intent::replay
