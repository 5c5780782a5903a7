#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "intent/perception.hpp"

namespace intent {

// Human push on one arm: the joint configuration the person is trying to move
// that arm to. Replay turns it into an external torque through the human
// spring model of the scene config.
struct Push {
  int arm = 0;
  Eigen::VectorXd target;

  bool operator==(const Push& o) const { return arm == o.arm && target == o.target; }
};

// One timestamped multimodal sample.
struct TraceFrame {
  double t = 0.0;
  std::vector<std::uint8_t> gamma;     // sensed touch bit per sensor id
  perception::Skeleton skeleton;       // 2D keypoints with depth; 3D left empty
  std::optional<perception::GazeEstimate> gaze;
  std::vector<Eigen::VectorXd> q;      // joint angles per arm
  std::optional<int> label;            // ground truth, 1 = intentional
  std::optional<Push> push;
};

}  // namespace intent
