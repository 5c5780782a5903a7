#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "intent/common.hpp"

namespace intent::perception {

enum class Joint : int {
  Head,
  Neck,
  LShoulder,
  RShoulder,
  LElbow,
  RElbow,
  LWrist,
  RWrist,
  LHip,
  RHip,
};
inline constexpr std::size_t kJointCount = 10;

std::string_view joint_name(Joint j);
std::optional<Joint> joint_from_name(std::string_view name);

// A 2D detection. Confidence 0 means the detector did not find the point.
struct Keypoint2D {
  double u = 0.0;
  double v = 0.0;
  double confidence = 0.0;
  std::optional<double> depth;  // meters, from the aligned depth image

  bool present() const { return confidence > 0.0; }
};

struct Skeleton {
  std::array<Keypoint2D, kJointCount> keypoints{};
  // World-frame positions, filled by project_skeleton.
  std::array<std::optional<Vec3>, kJointCount> keypoints3d{};

  Keypoint2D& operator[](Joint j) { return keypoints[static_cast<std::size_t>(j)]; }
  const Keypoint2D& operator[](Joint j) const { return keypoints[static_cast<std::size_t>(j)]; }
  const std::optional<Vec3>& world(Joint j) const { return keypoints3d[static_cast<std::size_t>(j)]; }
};

struct CameraIntrinsics {
  double fx = 600.0;
  double fy = 600.0;
  double cx = 320.0;
  double cy = 240.0;
};

void validate(const CameraIntrinsics& intr);

// Intrinsics plus the camera pose in the world frame (OpenCV axes: z forward,
// y down).
struct Camera {
  CameraIntrinsics intrinsics;
  Transform world_from_camera = Transform::Identity();

  // Camera looking from `eye` towards `target`; `up` is the world up vector.
  static Camera look_at(const CameraIntrinsics& intr, const Vec3& eye, const Vec3& target,
                        const Vec3& up = Vec3::UnitZ());
};

// Pinhole back-projection into the camera frame. Missing or non-positive depth
// yields nullopt; nothing is fabricated.
std::optional<Vec3> project_keypoint(const Keypoint2D& kp, const CameraIntrinsics& intr);

struct PixelDepth {
  Vec2 pixel;
  double depth;
};

// Forward projection of a camera-frame point. Throws GeometryError for points
// at or behind the image plane.
PixelDepth to_pixel(const Vec3& p_camera, const CameraIntrinsics& intr);
PixelDepth to_pixel(const Vec3& p_world, const Camera& camera);

// Back-projects every present keypoint with depth and stores world positions.
void project_skeleton(Skeleton& sk, const Camera& camera);

enum class Limb : int { LUpperArm, RUpperArm, LForearm, RForearm, ShoulderWidth };
inline constexpr std::size_t kLimbCount = 5;
std::string_view limb_name(Limb l);

struct LengthRange {
  double min = 0.0;
  double max = 0.0;
};

struct LimbLengthBounds {
  std::array<LengthRange, kLimbCount> ranges{};
  double max_missing_fraction = 0.5;

  static LimbLengthBounds defaults();
  const LengthRange& operator[](Limb l) const { return ranges[static_cast<std::size_t>(l)]; }
  LengthRange& operator[](Limb l) { return ranges[static_cast<std::size_t>(l)]; }
};

void validate(const LimbLengthBounds& bounds);

struct SkeletonCheck {
  bool accepted = true;
  std::string reason;
};

// Rejects skeletons with any measurable limb outside its range, or with too
// many keypoints lacking a 3D position. Limbs with a missing endpoint are not
// checked.
SkeletonCheck validate_skeleton(const Skeleton& sk, const LimbLengthBounds& bounds);

// Gaze ray in the image plane: origin at the head centroid, unit direction.
struct GazeEstimate {
  Vec2 origin = Vec2::Zero();
  Vec2 direction = Vec2::UnitX();

  // Normalizes `direction`; throws GeometryError for a zero vector.
  static GazeEstimate from(const Vec2& origin, const Vec2& direction);
  bool valid() const;
};

// Angle in [0, pi] between the gaze direction and the ray origin->poi.
// Throws GeometryError if poi coincides with the origin.
double gaze_angle_to_point(const GazeEstimate& gaze, const Vec2& poi);

}  // namespace intent::perception
