#pragma once

#include <span>
#include <string>
#include <vector>

#include "intent/common.hpp"

namespace intent::kinematics {

// Revolute joint followed by a fixed link offset. A link's frame is
//   parent * Rot(axis, q_i) * offset
// so the rotation is applied before the offset.
struct Link {
  Vec3 axis = Vec3::UnitZ();
  Transform offset = Transform::Identity();
};

struct KinematicChain {
  std::vector<Link> links;
  Eigen::VectorXd lower;  // joint limits, radians
  Eigen::VectorXd upper;

  std::size_t dof() const { return links.size(); }
  // Sum of link offset lengths; any point on the chain lies inside this radius
  // around the chain base.
  double reach() const;
};

// Throws LayoutError if the chain violates its invariants (unit axes, rigid
// offsets, limits sized to dof).
void validate(const KinematicChain& chain);

// Finite and within limits. Throws InputShapeError on length mismatch and
// ParameterError otherwise.
void check_joint_config(const KinematicChain& chain, const Eigen::VectorXd& q);

std::vector<Transform> forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q,
                                          const Transform& base = Transform::Identity());

struct Arm {
  std::string name;
  Transform base = Transform::Identity();
  KinematicChain chain;
};

struct SensorMount {
  int id = 0;
  int arm = 0;
  int link = 0;
  Transform mount = Transform::Identity();
};

struct SensorLayout {
  std::vector<SensorMount> sensors;  // sorted by id, ids dense 0..n-1
  std::size_t count() const { return sensors.size(); }
};

void validate(const SensorLayout& layout, std::span<const Arm> arms);

// Sensor positions indexed by id. arm_frames[a] are the world link frames of
// arm a.
std::vector<Vec3> sensor_world_positions(const SensorLayout& layout,
                                         std::span<const std::vector<Transform>> arm_frames);

// Convenience: FK on every arm and place every sensor.
std::vector<Vec3> sensor_world_positions(const SensorLayout& layout, std::span<const Arm> arms,
                                         std::span<const Eigen::VectorXd> q);

// End-effector (last link frame) position in world coordinates.
Vec3 end_effector(const Arm& arm, const Eigen::VectorXd& q);

// Demo geometry: a 7-DOF arm with link lengths summing to 1 m and a 23-sensor
// layout per arm (4 sensors on long links, 2 on short links, one on the wrist
// cap). Two mirrored arms give 46 sensors.
KinematicChain demo_chain();
std::vector<Arm> demo_arms();
SensorLayout demo_layout(std::span<const Arm> arms);

}  // namespace intent::kinematics
