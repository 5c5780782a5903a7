#include "intent/perception.hpp"

#include <cmath>

namespace intent::perception {

namespace {

constexpr std::array<std::string_view, kJointCount> kJointNames = {
    "head", "neck", "l_shoulder", "r_shoulder", "l_elbow",
    "r_elbow", "l_wrist", "r_wrist", "l_hip", "r_hip"};

constexpr std::array<std::string_view, kLimbCount> kLimbNames = {
    "l_upper_arm", "r_upper_arm", "l_forearm", "r_forearm", "shoulder_width"};

struct LimbEnds {
  Joint a;
  Joint b;
};

constexpr std::array<LimbEnds, kLimbCount> kLimbEnds = {{
    {Joint::LShoulder, Joint::LElbow},
    {Joint::RShoulder, Joint::RElbow},
    {Joint::LElbow, Joint::LWrist},
    {Joint::RElbow, Joint::RWrist},
    {Joint::LShoulder, Joint::RShoulder},
}};

}  // namespace

std::string_view joint_name(Joint j) { return kJointNames[static_cast<std::size_t>(j)]; }

std::optional<Joint> joint_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kJointCount; ++i)
    if (kJointNames[i] == name) return static_cast<Joint>(i);
  return std::nullopt;
}

std::string_view limb_name(Limb l) { return kLimbNames[static_cast<std::size_t>(l)]; }

void validate(const CameraIntrinsics& intr) {
  if (!(intr.fx > 0.0) || !(intr.fy > 0.0)) throw ConfigError("focal lengths must be positive");
  if (!std::isfinite(intr.cx) || !std::isfinite(intr.cy))
    throw ConfigError("principal point must be finite");
}

Camera Camera::look_at(const CameraIntrinsics& intr, const Vec3& eye, const Vec3& target,
                       const Vec3& up) {
  const Vec3 z = (target - eye).normalized();
  Vec3 x = z.cross(up);
  if (x.norm() < 1e-12) throw GeometryError("camera view direction is parallel to up vector");
  x.normalize();
  const Vec3 y = z.cross(x);
  Camera c;
  c.intrinsics = intr;
  c.world_from_camera.linear().col(0) = x;
  c.world_from_camera.linear().col(1) = y;
  c.world_from_camera.linear().col(2) = z;
  c.world_from_camera.translation() = eye;
  return c;
}

std::optional<Vec3> project_keypoint(const Keypoint2D& kp, const CameraIntrinsics& intr) {
  if (!kp.depth || !(*kp.depth > 0.0)) return std::nullopt;
  const double z = *kp.depth;
  return Vec3((kp.u - intr.cx) * z / intr.fx, (kp.v - intr.cy) * z / intr.fy, z);
}

PixelDepth to_pixel(const Vec3& p, const CameraIntrinsics& intr) {
  if (!(p.z() > 0.0)) throw GeometryError("point is not in front of the camera");
  return {Vec2(intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy), p.z()};
}

PixelDepth to_pixel(const Vec3& p_world, const Camera& camera) {
  return to_pixel(Vec3(camera.world_from_camera.inverse() * p_world), camera.intrinsics);
}

void project_skeleton(Skeleton& sk, const Camera& camera) {
  for (std::size_t i = 0; i < kJointCount; ++i) {
    sk.keypoints3d[i].reset();
    const auto& kp = sk.keypoints[i];
    if (!kp.present()) continue;
    if (auto p = project_keypoint(kp, camera.intrinsics))
      sk.keypoints3d[i] = camera.world_from_camera * *p;
  }
}

LimbLengthBounds LimbLengthBounds::defaults() {
  LimbLengthBounds b;
  b[Limb::LUpperArm] = {0.20, 0.45};
  b[Limb::RUpperArm] = {0.20, 0.45};
  b[Limb::LForearm] = {0.20, 0.45};
  b[Limb::RForearm] = {0.20, 0.45};
  b[Limb::ShoulderWidth] = {0.25, 0.55};
  return b;
}

void validate(const LimbLengthBounds& bounds) {
  for (std::size_t i = 0; i < kLimbCount; ++i) {
    const auto& r = bounds.ranges[i];
    if (!(r.min > 0.0) || !(r.min < r.max))
      throw ConfigError("limb bounds for " + std::string(kLimbNames[i]) + " need 0 < min < max");
  }
  if (!(bounds.max_missing_fraction >= 0.0 && bounds.max_missing_fraction <= 1.0))
    throw ConfigError("max_missing_fraction must lie in [0, 1]");
}

SkeletonCheck validate_skeleton(const Skeleton& sk, const LimbLengthBounds& bounds) {
  std::size_t missing = 0;
  for (const auto& p : sk.keypoints3d)
    if (!p) ++missing;
  const double frac = static_cast<double>(missing) / static_cast<double>(kJointCount);
  if (frac > bounds.max_missing_fraction)
    return {false, std::to_string(missing) + " of " + std::to_string(kJointCount) +
                       " keypoints missing"};
  for (std::size_t i = 0; i < kLimbCount; ++i) {
    const auto& pa = sk.world(kLimbEnds[i].a);
    const auto& pb = sk.world(kLimbEnds[i].b);
    if (!pa || !pb) continue;
    const double len = (*pa - *pb).norm();
    const auto& r = bounds.ranges[i];
    if (len < r.min || len > r.max)
      return {false, std::string(kLimbNames[i]) + " length " + std::to_string(len) +
                         " m outside [" + std::to_string(r.min) + ", " + std::to_string(r.max) +
                         "]"};
  }
  return {};
}

GazeEstimate GazeEstimate::from(const Vec2& origin, const Vec2& direction) {
  const double n = direction.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw GeometryError("gaze direction is degenerate");
  return {origin, direction / n};
}

bool GazeEstimate::valid() const {
  return origin.allFinite() && direction.allFinite() && std::abs(direction.norm() - 1.0) <= 1e-6;
}

double gaze_angle_to_point(const GazeEstimate& gaze, const Vec2& poi) {
  const Vec2 to_poi = poi - gaze.origin;
  if (to_poi.norm() < 1e-12) throw GeometryError("point of interest coincides with gaze origin");
  const double cross = gaze.direction.x() * to_poi.y() - gaze.direction.y() * to_poi.x();
  const double dot = gaze.direction.dot(to_poi);
  return std::atan2(std::abs(cross), dot);
}

}  // namespace intent::perception
