#include "intent/kinematics.hpp"

#include <cmath>
#include <numbers>

namespace intent::kinematics {

namespace {

bool is_rigid(const Transform& t, double tol) {
  const Eigen::Matrix3d r = t.linear();
  const double ortho = (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  return ortho <= tol && std::abs(r.determinant() - 1.0) <= tol && t.translation().allFinite();
}

}  // namespace

double KinematicChain::reach() const {
  double sum = 0.0;
  for (const auto& l : links) sum += l.offset.translation().norm();
  return sum;
}

void validate(const KinematicChain& chain) {
  if (chain.dof() < 1) throw LayoutError("kinematic chain needs at least one link");
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& l = chain.links[i];
    if (std::abs(l.axis.norm() - 1.0) > 1e-9)
      throw LayoutError("joint " + std::to_string(i) + " axis is not unit length");
    if (!is_rigid(l.offset, 1e-6))
      throw LayoutError("link " + std::to_string(i) + " offset is not a rigid transform");
  }
  if (static_cast<std::size_t>(chain.lower.size()) != chain.dof() ||
      static_cast<std::size_t>(chain.upper.size()) != chain.dof())
    throw LayoutError("joint limits must have one entry per joint");
  if ((chain.lower.array() > chain.upper.array()).any())
    throw LayoutError("joint lower limit exceeds upper limit");
}

void check_joint_config(const KinematicChain& chain, const Eigen::VectorXd& q) {
  if (static_cast<std::size_t>(q.size()) != chain.dof())
    throw InputShapeError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(chain.dof()));
  if (!q.allFinite()) throw ParameterError("joint vector has non-finite entries");
  if ((q.array() < chain.lower.array()).any() || (q.array() > chain.upper.array()).any())
    throw ParameterError("joint vector outside limits");
}

std::vector<Transform> forward_kinematics(const KinematicChain& chain, const Eigen::VectorXd& q,
                                          const Transform& base) {
  if (static_cast<std::size_t>(q.size()) != chain.dof())
    throw InputShapeError("joint vector has " + std::to_string(q.size()) + " entries, chain has " +
                          std::to_string(chain.dof()));
  std::vector<Transform> frames;
  frames.reserve(chain.dof());
  Transform t = base;
  for (std::size_t i = 0; i < chain.dof(); ++i) {
    const auto& l = chain.links[i];
    t = t * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(i)], l.axis) * l.offset;
    frames.push_back(t);
  }
  return frames;
}

void validate(const SensorLayout& layout, std::span<const Arm> arms) {
  for (std::size_t i = 0; i < layout.sensors.size(); ++i) {
    const auto& s = layout.sensors[i];
    if (s.id != static_cast<int>(i))
      throw LayoutError("sensor ids must be dense and sorted; expected " + std::to_string(i) +
                        ", got " + std::to_string(s.id));
    if (s.arm < 0 || static_cast<std::size_t>(s.arm) >= arms.size())
      throw LayoutError("sensor " + std::to_string(s.id) + " references missing arm");
    if (s.link < 0 || static_cast<std::size_t>(s.link) >= arms[s.arm].chain.dof())
      throw LayoutError("sensor " + std::to_string(s.id) + " references missing link " +
                        std::to_string(s.link));
    if (!is_rigid(s.mount, 1e-6))
      throw LayoutError("sensor " + std::to_string(s.id) + " mount is not a rigid transform");
  }
}

std::vector<Vec3> sensor_world_positions(const SensorLayout& layout,
                                         std::span<const std::vector<Transform>> arm_frames) {
  std::vector<Vec3> out;
  out.reserve(layout.count());
  for (const auto& s : layout.sensors) {
    if (s.arm < 0 || static_cast<std::size_t>(s.arm) >= arm_frames.size() || s.link < 0 ||
        static_cast<std::size_t>(s.link) >= arm_frames[s.arm].size())
      throw LayoutError("sensor " + std::to_string(s.id) + " has a dangling link index");
    out.push_back((arm_frames[s.arm][s.link] * s.mount).translation());
  }
  return out;
}

std::vector<Vec3> sensor_world_positions(const SensorLayout& layout, std::span<const Arm> arms,
                                         std::span<const Eigen::VectorXd> q) {
  if (q.size() != arms.size()) throw InputShapeError("need one joint vector per arm");
  std::vector<std::vector<Transform>> frames;
  frames.reserve(arms.size());
  for (std::size_t a = 0; a < arms.size(); ++a)
    frames.push_back(forward_kinematics(arms[a].chain, q[a], arms[a].base));
  return sensor_world_positions(layout, frames);
}

Vec3 end_effector(const Arm& arm, const Eigen::VectorXd& q) {
  return forward_kinematics(arm.chain, q, arm.base).back().translation();
}

KinematicChain demo_chain() {
  // Alternating yaw/pitch/roll joints; links extend along local +x.
  const double lengths[7] = {0.10, 0.20, 0.15, 0.20, 0.15, 0.10, 0.10};
  const Vec3 axes[7] = {Vec3::UnitZ(), Vec3::UnitY(), Vec3::UnitX(), Vec3::UnitY(),
                        Vec3::UnitX(), Vec3::UnitY(), Vec3::UnitX()};
  KinematicChain c;
  for (int i = 0; i < 7; ++i) {
    Link l;
    l.axis = axes[i];
    l.offset = Transform::Identity();
    l.offset.translation() = Vec3(lengths[i], 0.0, 0.0);
    c.links.push_back(l);
  }
  c.lower = Eigen::VectorXd::Constant(7, -std::numbers::pi);
  c.upper = Eigen::VectorXd::Constant(7, std::numbers::pi);
  return c;
}

std::vector<Arm> demo_arms() {
  std::vector<Arm> arms(2);
  arms[0].name = "left";
  arms[0].base.translation() = Vec3(0.0, 0.30, 1.20);
  arms[0].chain = demo_chain();
  arms[1].name = "right";
  arms[1].base.translation() = Vec3(0.0, -0.30, 1.20);
  arms[1].chain = demo_chain();
  return arms;
}

SensorLayout demo_layout(std::span<const Arm> arms) {
  constexpr double radius = 0.05;
  constexpr double long_link = 0.15;
  SensorLayout layout;
  int id = 0;
  auto add = [&](int arm, int link, const Vec3& p) {
    SensorMount s;
    s.id = id++;
    s.arm = arm;
    s.link = link;
    s.mount = Transform::Identity();
    s.mount.translation() = p;
    layout.sensors.push_back(s);
  };
  for (std::size_t a = 0; a < arms.size(); ++a) {
    const auto& chain = arms[a].chain;
    for (std::size_t i = 0; i < chain.dof(); ++i) {
      const Vec3 along = chain.links[i].offset.translation();
      const double len = along.norm();
      // Link frames sit at the distal end, so the link midpoint is at
      // offset^-1 * (along / 2) in the link frame.
      const Vec3 mid = chain.links[i].offset.inverse() * (0.5 * along);
      const Vec3 dir = len > 0.0 ? Vec3(along / len) : Vec3::UnitX();
      const Vec3 rot_dir = chain.links[i].offset.linear().transpose() * dir;
      Vec3 e1 = rot_dir.unitOrthogonal();
      Vec3 e2 = rot_dir.cross(e1);
      const int n = len >= long_link ? 4 : 2;
      for (int k = 0; k < n; ++k) {
        const double theta = (n == 4 ? k * 0.5 : k * 1.0) * std::numbers::pi;
        add(static_cast<int>(a), static_cast<int>(i),
            mid + radius * (std::cos(theta) * e1 + std::sin(theta) * e2));
      }
    }
    // wrist cap
    add(static_cast<int>(a), static_cast<int>(chain.dof() - 1), Vec3(0.02, 0.0, 0.0));
  }
  return layout;
}

}  // namespace intent::kinematics
