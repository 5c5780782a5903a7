#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "intent/common.hpp"
#include "intent/perception.hpp"

namespace intent::features {

// Binary touch state and world position of every sensor, indexed by id.
struct SensorSnapshot {
  std::vector<std::uint8_t> gamma;
  std::vector<Vec3> positions;

  std::size_t size() const { return gamma.size(); }
  bool any_active() const;
};

void validate(const SensorSnapshot& s);

enum class PoiKind { HandLeft, HandRight, Static };

struct Poi {
  std::string name;
  PoiKind kind = PoiKind::Static;
  Vec2 pixel = Vec2::Zero();
  std::optional<Vec3> world;  // hands only
};

struct PoiSet {
  std::vector<Poi> pois;
};

// Throws ParameterError if more than one entry of either hand kind is present.
void validate(const PoiSet& pois);

struct ScalingParams {
  double d_max = 1.0;          // m
  double d_dot_max = 1.0;      // 1/s, rate of the scaled distance
  double alpha_max = 1.0;      // rad
  double alpha_dot_max = 1.0;  // 1/s, rate of the scaled angle
  // Rate limit for the ungated proximity feature (see FeatureVector).
  double proximity_dot_max = 1.0;
};

void validate(const ScalingParams& p);

// Reduced per-frame feature set. The first five entries are the classifier
// inputs [gamma', d', d_dot', alpha', alpha_dot']. `proximity` and
// `proximity_dot` are the same hand distance and speed computed without touch
// gating; models that do not use the touch bit read these instead of d'.
struct FeatureVector {
  double gamma = 0.0;
  double d = 1.0;
  double d_dot = 0.0;
  double alpha = 1.0;
  double alpha_dot = 0.0;
  double proximity = 1.0;
  double proximity_dot = 0.0;

  std::array<double, 5> core() const { return {gamma, d, d_dot, alpha, alpha_dot}; }
  bool operator==(const FeatureVector&) const = default;
};

// Backward difference |x(t) - x(t - dt)| / dt, scaled by a rate maximum and
// clamped to [0, 1]. The first sample of a stream yields 0.
class BackwardDifference {
public:
  // Unscaled rate; throws StreamOrderError if t does not advance.
  double rate(double value, double t);
  double update(double value, double t, double rate_max);
  void reset() { prev_.reset(); }
  bool primed() const { return prev_.has_value(); }

private:
  std::optional<double> prev_;
  double prev_t_ = 0.0;
};

struct FeatureStreamState {
  BackwardDifference d;
  BackwardDifference alpha;
  BackwardDifference proximity;
  std::optional<double> last_t;

  void reset() { *this = FeatureStreamState{}; }
};

// Scaled hand distance to one sensor: 1 if the sensor is untouched,
// otherwise ||p_hand - p_sens|| / d_max clamped to 1.
double hand_distance(const Vec3& hand, std::size_t sensor, const SensorSnapshot& snapshot,
                     const ScalingParams& scaling);

struct Wrists {
  std::optional<Vec3> left;
  std::optional<Vec3> right;
};

// Unscaled gaze angles after hand assignment. A hand angle is present only if
// that hand is the closer one to at least one active sensor (ties go to the
// left hand). Static angles are always attempted; nullopt marks a degenerate
// geometry.
struct RawGazeAngles {
  std::optional<double> left;
  std::optional<double> right;
  std::vector<std::optional<double>> statics;
};

RawGazeAngles assign_hands_and_gaze_raw(const SensorSnapshot& snapshot, const Wrists& wrists,
                                        const std::optional<perception::GazeEstimate>& gaze,
                                        const PoiSet& pois);

struct GazeAngles {
  double left = 1.0;
  double right = 1.0;
  std::vector<double> statics;

  double min() const;
};

GazeAngles scale(const RawGazeAngles& raw, const ScalingParams& scaling);

GazeAngles assign_hands_and_gaze(const SensorSnapshot& snapshot, const Wrists& wrists,
                                 const std::optional<perception::GazeEstimate>& gaze,
                                 const PoiSet& pois, const ScalingParams& scaling);

// Everything the feature layer needs about one frame.
struct FrameInputs {
  double t = 0.0;
  SensorSnapshot snapshot;
  Wrists wrists;
  std::optional<perception::GazeEstimate> gaze;
  PoiSet pois;
};

// Unscaled geometry of a frame; the unit that scaling is fitted on.
struct FrameMeasurements {
  double t = 0.0;
  bool any_touch = false;
  std::vector<double> active_distances;  // every hand/active-sensor distance
  double gated_min = std::numeric_limits<double>::infinity();
  double ungated_min = std::numeric_limits<double>::infinity();
  RawGazeAngles angles;
};

FrameMeasurements measure(const FrameInputs& in);

// Applies scaling and the reduction to the 5-feature vector, advancing the
// stream's backward differences.
FeatureVector reduce(const FrameMeasurements& m, const ScalingParams& scaling,
                     FeatureStreamState& state);

inline FeatureVector extract(const FrameInputs& in, const ScalingParams& scaling,
                             FeatureStreamState& state) {
  return reduce(measure(in), scaling, state);
}

// Each maximum is the largest unscaled value seen over the training streams.
// Rates are measured on the scaled d' and alpha' of each stream separately.
ScalingParams fit_scaling(std::span<const std::vector<FrameMeasurements>> streams);

}  // namespace intent::features
