#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace intent::sim {

enum class ScenarioKind { Manipulation, Distracted, Collision, Idle, Mixed };

std::string_view kind_name(ScenarioKind k);
ScenarioKind kind_from_name(std::string_view name);  // throws ConfigError

struct Interval {
  double start = 0.0;  // s
  double end = 0.0;

  bool contains(double t) const { return t >= start && t < end; }
  bool operator==(const Interval&) const = default;
};

enum class Hand { Left, Right };
enum class BodyPart { Hip, Elbow };

// Human body dimensions, meters. The actor stands facing the robot (-x).
struct ActorGeometry {
  double upper_arm = 0.30;
  double forearm = 0.27;
  double shoulder_width = 0.40;
  double shoulder_height = 1.42;
  double hip_width = 0.20;
  double hip_height = 0.95;
  double head_height = 1.65;
  double stand_x = 1.0;  // pelvis position when not touching anything
  double stand_y = 0.0;

  bool operator==(const ActorGeometry&) const = default;
};

struct NoiseLevels {
  double pixel = 1.5;   // keypoint jitter sigma, px
  double gaze = 0.05;   // gaze direction jitter sigma, rad
  double depth = 0.005; // depth noise sigma, m

  bool operator==(const NoiseLevels&) const = default;
};

// Event schedule. Anything left empty is drawn from the seed; generate()
// returns the spec with every field resolved.
struct Schedule {
  std::optional<Interval> contact;      // touch or body contact
  std::optional<Interval> distraction;  // gaze on a far point
  std::optional<Interval> hover;        // hand held near a sensor, not touching
  std::optional<std::vector<Interval>> occlusions;  // wrist depth jumps
  std::optional<int> sensor;            // touched sensor id
  std::optional<Hand> hand;             // touching hand
  std::optional<BodyPart> body_part;    // collision contactor
  std::optional<double> push_scale;     // joint-space push magnitude, rad

  bool operator==(const Schedule&) const = default;
};

struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::Manipulation;
  double duration = 5.4;  // s
  std::uint64_t seed = 1;
  double frame_rate = 15.0;
  NoiseLevels noise;
  ActorGeometry actor;
  Schedule schedule;
  // Shrinks the actor's limbs to 40% in the emitted keypoints; such frames
  // are meant to be rejected by skeleton validation.
  bool mini_skeleton = false;

  bool operator==(const ScenarioSpec&) const = default;
};

// Throws ConfigError.
void validate(const ScenarioSpec& spec);

std::string to_json(const ScenarioSpec& spec);
ScenarioSpec spec_from_json(const std::string& text);
ScenarioSpec load_spec(const std::filesystem::path& path);

}  // namespace intent::sim
