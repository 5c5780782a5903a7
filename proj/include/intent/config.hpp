#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "intent/control.hpp"
#include "intent/kinematics.hpp"
#include "intent/perception.hpp"

namespace intent {

inline constexpr int kConfigFormatVersion = 1;

// Gaze target that is not a hand. Static targets have a fixed pixel; the
// end-effector target is re-projected every frame from forward kinematics.
struct PoiConfig {
  enum class Kind { Static, EndEffector };
  std::string name;
  Kind kind = Kind::Static;
  Vec2 pixel = Vec2::Zero();
  int arm = 0;
};

struct PipelineConfig {
  double window_span = 1.0;  // s
  double threshold = 0.5;
};

void validate(const PipelineConfig& c);

// Everything about the robot, camera and interaction setup that the pipeline,
// simulator and controller share.
struct SceneConfig {
  std::vector<kinematics::Arm> arms;
  kinematics::SensorLayout layout;
  perception::Camera camera;
  perception::LimbLengthBounds limb_bounds;
  std::vector<PoiConfig> pois;
  control::GainPresets gains;
  Eigen::VectorXd inertia;
  control::HumanPushModel push;
  double control_dt = 0.001;
  PipelineConfig pipeline;
  std::vector<Eigen::VectorXd> home;  // nominal joint configuration per arm

  static SceneConfig demo();
  // Hash of the canonical serialization; identifies the setup in trace headers.
  std::string id() const;
};

void validate(const SceneConfig& c);

std::string to_json(const SceneConfig& c);
SceneConfig scene_from_json(const std::string& text);
SceneConfig load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const SceneConfig& c);

}  // namespace intent
