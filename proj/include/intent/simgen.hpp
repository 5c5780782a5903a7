#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "intent/config.hpp"
#include "intent/models.hpp"
#include "intent/scenario.hpp"
#include "intent/traces.hpp"

namespace intent::sim {

// Fills every unset schedule field from the seed. Each field draws from its
// own stream, so resolving an already resolved spec is the identity.
ScenarioSpec resolve(const ScenarioSpec& spec, const SceneConfig& scene);

// Labeled trace for one scenario; the resolved spec goes into the header.
// Labels: a frame is intentional when a sensed touch bit is set, the body
// point nearest the active sensors is a wrist, and the user is not
// distracted. Throws GenerationError when the schedule cannot be realized
// with the actor's geometry (for example an unreachable sensor).
traces::Trace generate(const ScenarioSpec& spec, const SceneConfig& scene);

struct CorpusMix {
  int manipulation = 12;
  int distracted = 10;
  int collision = 7;
  int idle = 8;
  int mixed = 0;
  double duration = 5.4;
  std::uint64_t seed = 1;

  bool operator==(const CorpusMix&) const = default;
};

// Scenario list for a mix, kinds interleaved, seeds derived from mix.seed.
std::vector<ScenarioSpec> expand_mix(const CorpusMix& mix);

// Corpus file: either {"mix": {...}} or {"scenarios": [spec, ...]}.
std::vector<ScenarioSpec> corpus_from_json(const std::string& text);
std::string mix_to_json(const CorpusMix& mix);

struct Corpus {
  std::vector<traces::Trace> traces;
  traces::AssembledDataset dataset;
  std::size_t positives = 0;
};

// Generates every scenario (in parallel when exec allows) and assembles the
// labeled dataset. Throws CorpusError if fewer than two scenario kinds or a
// single label class are present.
Corpus build_corpus(const std::vector<ScenarioSpec>& specs, const SceneConfig& scene,
                    models::Exec exec = models::Exec::Parallel);

}  // namespace intent::sim
