#include "intent/simgen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>

#include <json.hpp>

#include "intent/kinematics.hpp"

namespace intent::sim {

namespace {

using perception::Joint;
using perception::kJointCount;

constexpr double kScanPeriod = 0.4;   // s per arm
constexpr double kGrasp = 0.07;       // wrist keypoint to touched sensor, m
constexpr double kReach = 0.9;        // s
constexpr double kRetract = 0.8;      // s
constexpr double kSaccade = 0.12;     // s
constexpr double kApproach = 0.8;     // s, body walking into a collision
constexpr double kApproachDist = 0.35;
const Vec3 kUp = Vec3::UnitZ();

// Independent random streams per purpose, so fixing one schedule field does
// not shift the draws of another.
enum Stream : std::uint64_t {
  kContact = 1,
  kDistraction,
  kOcclusion,
  kHand,
  kSensor,
  kBodyPart,
  kPushScale,
  kHover,
  kStance = 10,
  kGaze,
  kNoise,
  kScan,
  kJump,
  kPush,
};

Rng stream(std::uint64_t seed, Stream s) {
  return Rng(seed * 0x9E3779B97F4A7C15ULL ^ (static_cast<std::uint64_t>(s) * 0xD1B54A32D192ED03ULL));
}

double min_jerk(double tau) {
  tau = std::clamp(tau, 0.0, 1.0);
  return tau * tau * tau * (10.0 - 15.0 * tau + 6.0 * tau * tau);
}

double ramp(double t, double t0, double t1) { return t1 > t0 ? min_jerk((t - t0) / (t1 - t0)) : (t >= t1 ? 1.0 : 0.0); }

Vec3 blend(const Vec3& a, const Vec3& b, double s) { return a + s * (b - a); }

bool has_hand_contact(ScenarioKind k) {
  return k == ScenarioKind::Manipulation || k == ScenarioKind::Distracted || k == ScenarioKind::Mixed;
}

bool has_hover(ScenarioKind k) { return k == ScenarioKind::Idle || k == ScenarioKind::Mixed; }

double side_sign(Hand h) { return h == Hand::Left ? -1.0 : 1.0; }

// Ground point under the pelvis plus facing direction.
struct BodyFrame {
  Vec3 root = Vec3::Zero();
  double yaw = std::numbers::pi;

  Vec3 fwd() const { return {std::cos(yaw), std::sin(yaw), 0.0}; }
  Vec3 right() const { return fwd().cross(kUp); }
  Vec3 at(double f, double r, double z) const { return root + f * fwd() + r * right() + z * kUp; }
};

Vec3 shoulder(const BodyFrame& b, const ActorGeometry& a, double side) {
  return b.at(0.0, side * a.shoulder_width / 2.0, a.shoulder_height);
}

// Two-link placement with exact segment lengths. The wrist is pulled in or
// pushed out along the shoulder-wrist line if the target is out of range.
struct ArmPose {
  Vec3 elbow;
  Vec3 wrist;
};

ArmPose solve_arm(const Vec3& s, const Vec3& w, double a, double b, const Vec3& pole) {
  Vec3 d = w - s;
  double len = d.norm();
  const Vec3 u = len > 1e-9 ? Vec3(d / len) : Vec3(-kUp);
  len = std::clamp(len, std::abs(a - b) + 1e-6, a + b - 1e-6);
  const double x = (a * a - b * b + len * len) / (2.0 * len);
  const double r = std::sqrt(std::max(0.0, a * a - x * x));
  Vec3 p = pole - pole.dot(u) * u;
  if (p.norm() < 1e-9) p = u.unitOrthogonal();
  p.normalize();
  return {s + x * u + r * p, s + len * u};
}

Vec3 elbow_pole(const BodyFrame& b, double side) {
  return -0.3 * b.fwd() + side * 0.6 * b.right() - kUp;
}

Vec3 rest_wrist(const BodyFrame& b, const ActorGeometry& a, double side) {
  return shoulder(b, a, side) + 0.05 * b.fwd() + side * 0.06 * b.right() -
         0.89 * (a.upper_arm + a.forearm) * kUp;
}

Vec3 hold_wrist(const BodyFrame& b, const ActorGeometry& a, double side) {
  return shoulder(b, a, side) + 0.35 * b.fwd() - side * 0.08 * b.right() - 0.30 * kUp;
}

// Per-trace randomness for where and how the actor stands.
struct StanceParams {
  double yaw_jitter = 0.0;
  double reach_ratio = 0.85;
  double lateral = 0.1;
  double hover_gap = 0.12;
};

StanceParams draw_stance(std::uint64_t seed) {
  Rng r = stream(seed, kStance);
  StanceParams p;
  p.yaw_jitter = r.uniform(-0.12, 0.12);
  p.reach_ratio = r.uniform(0.78, 0.9);
  p.lateral = r.uniform(0.06, 0.12);
  p.hover_gap = r.uniform(0.09, 0.17);
  return p;
}

// Actor placement for a scenario: the body frame at the moment of contact (or
// hover) and the role of the chosen sensor.
struct Placement {
  BodyFrame body;
  double side = 1.0;
  double elbow_theta = 0.0;  // elbow contacts: upper arm angle from vertical
};

std::optional<Placement> place_hand(const Vec3& p, Hand hand, const ActorGeometry& a, const StanceParams& sp) {
  const double side = side_sign(hand);
  const double reach = a.upper_arm + a.forearm;
  const double dist = sp.reach_ratio * reach + kGrasp;
  const double dz = a.shoulder_height - p.z();
  const double h2 = dist * dist - dz * dz - sp.lateral * sp.lateral;
  if (h2 < 0.15 * 0.15) return std::nullopt;
  Placement pl;
  pl.side = side;
  pl.body.yaw = std::numbers::pi + sp.yaw_jitter;
  const Vec3 f = pl.body.fwd(), r = pl.body.right();
  Vec3 s = p - std::sqrt(h2) * f + side * sp.lateral * r;
  s.z() = a.shoulder_height;
  pl.body.root = s - side * a.shoulder_width / 2.0 * r;
  pl.body.root.z() = 0.0;
  return pl;
}

std::optional<Placement> place_hip(const Vec3& p, double side, const ActorGeometry& a, const StanceParams& sp) {
  if (std::abs(p.z() - a.hip_height) > 0.08) return std::nullopt;
  Placement pl;
  pl.side = side;
  pl.body.yaw = sp.yaw_jitter;  // back to the robot
  Vec3 hip = p + 0.08 * pl.body.fwd();
  pl.body.root = hip - side * a.hip_width / 2.0 * pl.body.right();
  pl.body.root.z() = 0.0;
  return pl;
}

std::optional<Placement> place_elbow(const Vec3& p, double side, const ActorGeometry& a, const StanceParams& sp) {
  const double c = (a.shoulder_height - p.z()) / a.upper_arm;
  if (c < std::cos(75.0 * std::numbers::pi / 180.0) || c > std::cos(15.0 * std::numbers::pi / 180.0))
    return std::nullopt;
  Placement pl;
  pl.side = side;
  pl.elbow_theta = std::acos(c);
  pl.body.yaw = sp.yaw_jitter;
  const Vec3 f = pl.body.fwd();
  const Vec3 elbow = p + 0.05 * f;
  Vec3 s = elbow + a.upper_arm * std::sin(pl.elbow_theta) * f;
  pl.body.root = s - side * a.shoulder_width / 2.0 * pl.body.right();
  pl.body.root.z() = 0.0;
  return pl;
}

std::optional<Placement> place(const ScenarioSpec& spec, const Vec3& p, const StanceParams& sp) {
  const auto& sc = spec.schedule;
  if (spec.kind == ScenarioKind::Collision) {
    const double side = sc.hand && *sc.hand == Hand::Left ? -1.0 : 1.0;
    return sc.body_part && *sc.body_part == BodyPart::Elbow ? place_elbow(p, side, spec.actor, sp)
                                                           : place_hip(p, side, spec.actor, sp);
  }
  return place_hand(p, sc.hand.value_or(Hand::Right), spec.actor, sp);
}

std::vector<Vec3> home_sensor_positions(const SceneConfig& scene) {
  return kinematics::sensor_world_positions(scene.layout, scene.arms, scene.home);
}

// World points the user may look at that are not targets of interest.
// Distractors sit behind the actor, far from every target in the image.
const std::array<Vec3, 3> kDistractors = {Vec3(3.0, 0.0, 1.8), Vec3(3.0, -0.6, 1.7), Vec3(3.0, 0.6, 1.7)};
const std::array<Vec3, 2> kElsewhere = {Vec3(1.4, 0.9, 0.0), Vec3(1.0, -1.6, 1.2)};

enum class TargetKind { Hand, Poi, Elsewhere, Distractor };
struct GazeTarget {
  TargetKind kind = TargetKind::Poi;
  int index = 0;  // hand: 0 left, 1 right
  bool operator==(const GazeTarget&) const = default;
};
struct GazeSwitch {
  double t = 0.0;
  GazeTarget target;
};

}  // namespace

ScenarioSpec resolve(const ScenarioSpec& spec, const SceneConfig& scene) {
  validate(spec);
  ScenarioSpec out = spec;
  auto& s = out.schedule;
  const double dur = spec.duration;
  auto too_short = [&] {
    throw GenerationError("duration " + std::to_string(dur) + " s is too short for a " +
                          std::string(kind_name(spec.kind)) + " scenario");
  };

  if (has_hover(spec.kind) && !s.hover) {
    Rng r = stream(spec.seed, kHover);
    const double h0 = r.uniform(0.9, 1.3);
    const double len = spec.kind == ScenarioKind::Idle ? r.uniform(1.6, 2.6) : r.uniform(0.6, 1.0);
    const double h1 = std::min(h0 + len, dur - (spec.kind == ScenarioKind::Idle ? 0.9 : 1.6));
    if (h1 - h0 < 0.3) too_short();
    s.hover = Interval{h0, h1};
  }
  if (spec.kind != ScenarioKind::Idle && !s.contact) {
    Rng r = stream(spec.seed, kContact);
    double t0 = 0.0, t1 = 0.0;
    switch (spec.kind) {
      case ScenarioKind::Manipulation:
        t0 = r.uniform(0.9, 1.5);
        t1 = std::min(t0 + r.uniform(2.4, 3.2), dur - 0.9);
        break;
      case ScenarioKind::Distracted:
        t0 = r.uniform(0.6, 0.9);
        t1 = dur - r.uniform(0.3, 0.5);
        break;
      case ScenarioKind::Collision:
        t0 = r.uniform(1.0, 1.6);
        t1 = std::min(t0 + r.uniform(2.2, 3.0), dur - 0.6);
        break;
      case ScenarioKind::Mixed:
        t0 = s.hover->end + 0.4;
        t1 = dur - r.uniform(0.5, 0.8);
        break;
      case ScenarioKind::Idle: break;
    }
    if (t1 - t0 < 0.8) too_short();
    s.contact = Interval{t0, t1};
  }
  if (!s.distraction && s.contact &&
      (spec.kind == ScenarioKind::Distracted || spec.kind == ScenarioKind::Mixed)) {
    Rng r = stream(spec.seed, kDistraction);
    const bool want = spec.kind == ScenarioKind::Distracted || r.bernoulli(0.5);
    if (want) {
      const double d0 = s.contact->start + r.uniform(0.9, 1.3);
      const double d1 = std::min(d0 + r.uniform(2.0, 2.6), s.contact->end - 0.4);
      if (d1 - d0 >= 0.5)
        s.distraction = Interval{d0, d1};
      else if (spec.kind == ScenarioKind::Distracted)
        too_short();
    }
  }
  if (!s.hand) s.hand = stream(spec.seed, kHand).bernoulli(0.5) ? Hand::Left : Hand::Right;
  if (spec.kind == ScenarioKind::Collision && !s.body_part)
    s.body_part = stream(spec.seed, kBodyPart).bernoulli(0.6) ? BodyPart::Hip : BodyPart::Elbow;
  if (s.contact && !s.push_scale) {
    Rng r = stream(spec.seed, kPushScale);
    s.push_scale = spec.kind == ScenarioKind::Collision ? r.uniform(0.2, 0.35) : r.uniform(0.15, 0.3);
  }
  if (!s.occlusions) {
    s.occlusions.emplace();
    Rng r = stream(spec.seed, kOcclusion);
    if (has_hand_contact(spec.kind) && r.bernoulli(0.4) && s.contact->end - s.contact->start > 1.4) {
      const double o0 = r.uniform(s.contact->start + 0.3, s.contact->end - 0.8);
      s.occlusions->push_back({o0, o0 + r.uniform(0.3, 0.6)});
    }
  }

  const auto sp = draw_stance(spec.seed);
  const auto positions = home_sensor_positions(scene);
  if (s.sensor) {
    if (static_cast<std::size_t>(*s.sensor) >= positions.size())
      throw GenerationError("sensor " + std::to_string(*s.sensor) + " does not exist");
    if (!place(out, positions[static_cast<std::size_t>(*s.sensor)], sp))
      throw GenerationError("sensor " + std::to_string(*s.sensor) + " is out of reach for the actor");
  } else {
    std::vector<int> candidates;
    for (std::size_t i = 0; i < positions.size(); ++i)
      if (place(out, positions[i], sp)) candidates.push_back(static_cast<int>(i));
    if (candidates.empty()) throw GenerationError("no sensor is reachable for the actor geometry");
    Rng r = stream(spec.seed, kSensor);
    s.sensor = candidates[r.index(candidates.size())];
  }
  validate(out);
  return out;
}

traces::Trace generate(const ScenarioSpec& spec_in, const SceneConfig& scene) {
  const ScenarioSpec spec = resolve(spec_in, scene);
  const auto& sc = spec.schedule;
  const auto& actor = spec.actor;
  const auto sp = draw_stance(spec.seed);
  const auto home_positions = home_sensor_positions(scene);
  const auto sensor = static_cast<std::size_t>(*sc.sensor);
  const auto& mount = scene.layout.sensors[sensor];
  const auto arm = static_cast<std::size_t>(mount.arm);
  const Placement placement = *place(spec, home_positions[sensor], sp);
  const double side = placement.side;
  const double reach = actor.upper_arm + actor.forearm;
  const auto dof = static_cast<Eigen::Index>(scene.arms[arm].chain.dof());

  std::vector<double> times;
  for (std::size_t k = 0;; ++k) {
    const double t = static_cast<double>(k) / spec.frame_rate;
    if (t >= spec.duration) break;
    times.push_back(t);
  }
  const std::size_t n = times.size();

  // Human push: joint-space target that moves in min-jerk segments while in
  // contact. Only joints up to the touched link move the sensor.
  struct Segment {
    double t0, t1;
    Eigen::VectorXd delta;
  };
  std::vector<Segment> segments;
  if (sc.contact) {
    Rng r = stream(spec.seed, kPush);
    const int moving = std::min(mount.link, 3) + 1;
    auto draw_delta = [&](double lo, double hi) {
      Eigen::VectorXd d = Eigen::VectorXd::Zero(dof);
      for (int j = 0; j < moving; ++j) d[j] = r.uniform(-1.0, 1.0);
      if (d.norm() < 1e-6) d[0] = 1.0;
      return Eigen::VectorXd(d.normalized() * (*sc.push_scale * r.uniform(lo, hi)));
    };
    const double c0 = sc.contact->start, c1 = sc.contact->end;
    if (spec.kind == ScenarioKind::Collision) {
      segments.push_back({c0, c1, draw_delta(0.7, 1.0)});
    } else if (sc.distraction) {
      // A distracted user keeps pushing, harder than before.
      const auto& d = *sc.distraction;
      if (d.start - 0.5 > c0 + 0.9) segments.push_back({c0 + 0.3, d.start - 0.5, draw_delta(0.7, 1.0)});
      segments.push_back({d.start, d.end, draw_delta(1.5, 2.0)});
      if (c1 - 0.2 > d.end + 0.6) segments.push_back({d.end + 0.2, c1 - 0.2, draw_delta(0.7, 1.0)});
    } else {
      segments.push_back({c0 + 0.3, std::max(c0 + 0.6, c1 - 0.3), draw_delta(0.7, 1.0)});
    }
  }
  auto push_target = [&](double t) {
    Eigen::VectorXd q = scene.home[arm];
    for (const auto& s : segments) q += ramp(t, s.t0, s.t1) * s.delta;
    return q;
  };

  // Arm motion without any safety stop: compliant around home, as in replay
  // with control off.
  std::vector<Eigen::VectorXd> q_arm(n);
  std::vector<std::optional<Eigen::VectorXd>> pushes(n);
  {
    control::ArmState st = control::ArmState::at_rest(scene.home[arm]);
    for (std::size_t i = 0; i < n; ++i) {
      q_arm[i] = st.q;
      if (sc.contact && sc.contact->contains(times[i])) pushes[i] = push_target(times[i]);
      if (i + 1 < n)
        st = control::advance(st, scene.gains.compliant, pushes[i] ? &*pushes[i] : nullptr, scene.push,
                              times[i + 1] - times[i], scene.control_dt, scene.inertia);
    }
  }

  // Sensor scan phases: arm a samples all its sensors every kScanPeriod.
  const double phase0 = stream(spec.seed, kScan).uniform(0.0, kScanPeriod);
  auto scan_time = [&](int a, double t) -> std::optional<double> {
    const double ph = std::fmod(phase0 + 0.5 * kScanPeriod * a, kScanPeriod);
    if (t < ph) return std::nullopt;
    return ph + std::floor((t - ph) / kScanPeriod + 1e-9) * kScanPeriod;
  };

  // Gaze schedule.
  std::vector<int> static_pois, ee_pois;
  for (std::size_t i = 0; i < scene.pois.size(); ++i)
    (scene.pois[i].kind == PoiConfig::Kind::Static ? static_pois : ee_pois).push_back(static_cast<int>(i));
  const int active_hand = side < 0 ? 0 : 1;
  std::optional<Interval> engaged;
  if (spec.kind != ScenarioKind::Collision) {
    double e0 = sc.hover ? sc.hover->start : sc.contact->start;
    double e1 = sc.contact ? sc.contact->end : sc.hover->end;
    engaged = Interval{e0 - 0.6, e1 + 0.3};
  }
  std::vector<GazeSwitch> gaze_plan;
  {
    Rng r = stream(spec.seed, kGaze);
    auto pick = [&](double t, const GazeTarget* current) {
      GazeTarget g;
      for (int attempt = 0; attempt < 4; ++attempt) {
        if (sc.distraction && sc.distraction->contains(t)) {
          g = {TargetKind::Distractor, static_cast<int>(r.index(kDistractors.size()))};
        } else if (engaged && engaged->contains(t)) {
          const double u = r.uniform();
          int arm_poi = -1;
          for (int i : ee_pois)
            if (scene.pois[static_cast<std::size_t>(i)].arm == mount.arm) arm_poi = i;
          if (u < 0.45 || (arm_poi < 0 && static_pois.empty()))
            g = {TargetKind::Hand, active_hand};
          else if (u < 0.75 && arm_poi >= 0)
            g = {TargetKind::Poi, arm_poi};
          else if (!static_pois.empty())
            g = {TargetKind::Poi, static_pois[r.index(static_pois.size())]};
          else
            g = {TargetKind::Hand, active_hand};
        } else {
          const double u = r.uniform();
          if (u < 0.3)
            g = {TargetKind::Elsewhere, static_cast<int>(r.index(kElsewhere.size()))};
          else if (u < 0.5)
            g = {TargetKind::Hand, static_cast<int>(r.index(2))};
          else if (!scene.pois.empty())
            g = {TargetKind::Poi, static_cast<int>(r.index(scene.pois.size()))};
          else
            g = {TargetKind::Elsewhere, 0};
        }
        if (!current || !(g == *current)) break;
      }
      return g;
    };
    std::vector<double> forced;
    if (sc.distraction) forced = {sc.distraction->start, sc.distraction->end};
    double t = 0.0;
    gaze_plan.push_back({0.0, pick(0.0, nullptr)});
    while (true) {
      const double natural = t + r.uniform(0.5, 2.0);
      double next = natural;
      for (double f : forced)
        if (f > t && f <= next) next = f;
      if (next >= spec.duration) break;
      gaze_plan.push_back({next, pick(next, &gaze_plan.back().target)});
      t = next;
    }
  }

  Rng noise = stream(spec.seed, kNoise);
  Rng jump_rng = stream(spec.seed, kJump);
  std::vector<double> jumps;
  for (std::size_t i = 0; i < sc.occlusions->size(); ++i) jumps.push_back(jump_rng.uniform(0.08, 0.25));

  const Transform cam_from_world = scene.camera.world_from_camera.inverse();
  const auto& intr = scene.camera.intrinsics;
  auto pixel_of = [&](const Vec3& w) -> std::optional<Vec2> {
    const Vec3 c = cam_from_world * w;
    if (c.z() <= 1e-6) return std::nullopt;
    return perception::to_pixel(c, intr).pixel;
  };

  traces::Trace trace;
  trace.header = traces::make_header(scene, spec.frame_rate);
  trace.header.scenario = spec;
  trace.frames.reserve(n);

  const Vec3 p_home = home_positions[sensor];
  const Vec3 grasp_dir = (shoulder(placement.body, actor, side) - p_home).normalized();
  const Vec3 contact_wrist_home = p_home + kGrasp * grasp_dir;
  const Vec3 hover_wrist = p_home + sp.hover_gap * grasp_dir;
  const bool hand_contact = has_hand_contact(spec.kind);

  Vec3 last_contact_wrist = contact_wrist_home;
  Vec3 collision_follow = Vec3::Zero();
  double last_gaze_angle = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const double t = times[i];
    std::vector<Eigen::VectorXd> q = scene.home;
    q[arm] = q_arm[i];
    const auto positions = kinematics::sensor_world_positions(scene.layout, scene.arms, q);
    const Vec3 p_s = positions[sensor];
    const bool in_contact = sc.contact && sc.contact->contains(t);

    BodyFrame body = placement.body;
    std::array<Vec3, kJointCount> kp{};
    auto J = [&](Joint j) -> Vec3& { return kp[static_cast<std::size_t>(j)]; };
    const double other = -side;

    if (spec.kind == ScenarioKind::Collision) {
      const double c0 = sc.contact->start, c1 = sc.contact->end;
      double away = 0.0;
      if (t < c0) away = 1.0 - ramp(t, c0 - kApproach, c0);
      if (t >= c1) away = ramp(t, c1, c1 + kApproach);
      if (in_contact) {
        collision_follow = p_s - p_home;
        collision_follow.z() = 0.0;
      }
      body.root += collision_follow + kApproachDist * away * body.fwd();
    } else {
      // Active wrist target.
      Vec3 target;
      const Vec3 rest = rest_wrist(body, actor, side);
      if (in_contact) {
        target = p_s + kGrasp * grasp_dir;
        last_contact_wrist = target;
      } else if (sc.contact && t >= sc.contact->end) {
        target = blend(last_contact_wrist, rest, ramp(t, sc.contact->end, sc.contact->end + kRetract));
      } else if (sc.hover && t >= sc.hover->start && t < sc.hover->end) {
        target = hover_wrist + 0.01 * std::sin(2.0 * std::numbers::pi * 0.7 * t) * body.right();
      } else if (sc.hover && t >= sc.hover->end) {
        const Vec3 h = hover_wrist + 0.01 * std::sin(2.0 * std::numbers::pi * 0.7 * sc.hover->end) * body.right();
        if (sc.contact)
          target = blend(h, contact_wrist_home, ramp(t, sc.hover->end, sc.contact->start));
        else
          target = blend(h, rest, ramp(t, sc.hover->end, sc.hover->end + kRetract));
      } else if (sc.hover) {
        target = blend(rest, hover_wrist, ramp(t, sc.hover->start - kReach, sc.hover->start));
      } else {
        target = blend(rest, contact_wrist_home, ramp(t, sc.contact->start - kReach, sc.contact->start));
      }
      // Step towards (or away from) the wrist target when it leaves the
      // comfortable reach of the shoulder.
      Vec3 gap = target - shoulder(body, actor, side);
      gap.z() = 0.0;
      const double dist = (target - shoulder(body, actor, side)).norm();
      if (dist > 0.95 * reach && gap.norm() > 1e-9) body.root += (dist - 0.95 * reach) * gap.normalized();
      const double near = std::abs(actor.upper_arm - actor.forearm) + 0.1;
      if (dist < near && gap.norm() > 1e-9) body.root -= (near - dist) * gap.normalized();
      const Vec3 s = shoulder(body, actor, side);
      const ArmPose pose = solve_arm(s, target, actor.upper_arm, actor.forearm, elbow_pole(body, side));
      J(side < 0 ? Joint::LElbow : Joint::RElbow) = pose.elbow;
      J(side < 0 ? Joint::LWrist : Joint::RWrist) = pose.wrist;
      const Vec3 so = shoulder(body, actor, other);
      const ArmPose rest_pose =
          solve_arm(so, rest_wrist(body, actor, other), actor.upper_arm, actor.forearm, elbow_pole(body, other));
      J(other < 0 ? Joint::LElbow : Joint::RElbow) = rest_pose.elbow;
      J(other < 0 ? Joint::LWrist : Joint::RWrist) = rest_pose.wrist;
    }

    if (spec.kind == ScenarioKind::Collision) {
      for (double sd : {-1.0, 1.0}) {
        const Vec3 s = shoulder(body, actor, sd);
        ArmPose pose;
        if (sd == side && sc.body_part == BodyPart::Elbow) {
          const double th = placement.elbow_theta;
          pose.elbow = s - actor.upper_arm * (std::sin(th) * body.fwd() + std::cos(th) * kUp);
          const double lift = 10.0 * std::numbers::pi / 180.0;
          pose.wrist = pose.elbow + actor.forearm * (std::cos(lift) * body.fwd() + std::sin(lift) * kUp);
        } else {
          pose = solve_arm(s, hold_wrist(body, actor, sd), actor.upper_arm, actor.forearm, elbow_pole(body, sd));
        }
        J(sd < 0 ? Joint::LElbow : Joint::RElbow) = pose.elbow;
        J(sd < 0 ? Joint::LWrist : Joint::RWrist) = pose.wrist;
      }
    }

    J(Joint::Head) = body.at(0.0, 0.0, actor.head_height);
    J(Joint::Neck) = body.at(0.0, 0.0, actor.shoulder_height + 0.05);
    J(Joint::LShoulder) = shoulder(body, actor, -1.0);
    J(Joint::RShoulder) = shoulder(body, actor, 1.0);
    J(Joint::LHip) = body.at(0.0, -actor.hip_width / 2.0, actor.hip_height);
    J(Joint::RHip) = body.at(0.0, actor.hip_width / 2.0, actor.hip_height);

    // Touch bits, held between scans.
    TraceFrame frame;
    frame.t = t;
    frame.q = q;
    frame.gamma.assign(scene.layout.count(), 0);
    if (sc.contact) {
      const auto scan = scan_time(mount.arm, t);
      if (scan && sc.contact->contains(*scan)) frame.gamma[sensor] = 1;
    }

    // Label rule.
    int label = 0;
    if (frame.gamma[sensor]) {
      std::size_t nearest = 0;
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < kJointCount; ++j) {
        const double d = (kp[j] - p_s).norm();
        if (d < best) {
          best = d;
          nearest = j;
        }
      }
      const bool wrist = nearest == static_cast<std::size_t>(Joint::LWrist) ||
                         nearest == static_cast<std::size_t>(Joint::RWrist);
      const bool attentive = !(sc.distraction && sc.distraction->contains(t));
      label = wrist && attentive ? 1 : 0;
    }
    frame.label = label;
    if (pushes[i]) frame.push = Push{mount.arm, *pushes[i]};

    // Keypoint observations.
    std::array<Vec3, kJointCount> observed = kp;
    if (spec.mini_skeleton) {
      const Vec3 c = kp[static_cast<std::size_t>(Joint::Neck)];
      for (auto& p : observed) p = c + 0.4 * (p - c);
    }
    for (std::size_t j = 0; j < kJointCount; ++j) {
      const Vec3 c = cam_from_world * observed[j];
      auto& k = frame.skeleton.keypoints[j];
      const double du = noise.normal(0.0, spec.noise.pixel);
      const double dv = noise.normal(0.0, spec.noise.pixel);
      const double dd = noise.normal(0.0, spec.noise.depth);
      const double conf = noise.uniform(0.7, 1.0);
      if (c.z() <= 1e-6) continue;
      const Vec2 px = perception::to_pixel(c, intr).pixel;
      k.u = px.x() + du;
      k.v = px.y() + dv;
      k.depth = c.z() + dd;
      k.confidence = conf;
    }
    if (hand_contact) {
      const auto wrist = static_cast<std::size_t>(side < 0 ? Joint::LWrist : Joint::RWrist);
      for (std::size_t o = 0; o < sc.occlusions->size(); ++o) {
        if (!(*sc.occlusions)[o].contains(t) || !frame.skeleton.keypoints[wrist].depth) continue;
        // The arm in front of the hand returns a nearer depth; shrink the jump
        // until the skeleton still passes limb checks.
        const double base = *frame.skeleton.keypoints[wrist].depth;
        double jump = jumps[o];
        bool ok = false;
        for (int tries = 0; tries < 8 && !ok; ++tries, jump *= 0.5) {
          frame.skeleton.keypoints[wrist].depth = base - jump;
          perception::Skeleton probe = frame.skeleton;
          perception::project_skeleton(probe, scene.camera);
          ok = perception::validate_skeleton(probe, scene.limb_bounds).accepted;
        }
        if (!ok) frame.skeleton.keypoints[wrist].depth = base;
      }
    }

    // Gaze ray from the observed head position.
    const auto& head = frame.skeleton[Joint::Head];
    const Vec2 origin(head.u, head.v);
    const auto head_true = pixel_of(kp[static_cast<std::size_t>(Joint::Head)]);
    auto target_angle = [&](const GazeTarget& g) -> std::optional<double> {
      std::optional<Vec2> px;
      switch (g.kind) {
        case TargetKind::Hand:
          px = pixel_of(kp[static_cast<std::size_t>(g.index == 0 ? Joint::LWrist : Joint::RWrist)]);
          break;
        case TargetKind::Poi: {
          const auto& poi = scene.pois[static_cast<std::size_t>(g.index)];
          if (poi.kind == PoiConfig::Kind::Static)
            px = poi.pixel;
          else
            px = pixel_of(kinematics::end_effector(scene.arms[static_cast<std::size_t>(poi.arm)],
                                                   q[static_cast<std::size_t>(poi.arm)]));
          break;
        }
        case TargetKind::Elsewhere: px = pixel_of(kElsewhere[static_cast<std::size_t>(g.index)]); break;
        case TargetKind::Distractor: px = pixel_of(kDistractors[static_cast<std::size_t>(g.index)]); break;
      }
      if (!px || !head_true) return std::nullopt;
      const Vec2 d = *px - *head_true;
      if (d.norm() < 1e-9) return std::nullopt;
      return std::atan2(d.y(), d.x());
    };
    std::size_t g = 0;
    while (g + 1 < gaze_plan.size() && gaze_plan[g + 1].t <= t) ++g;
    double angle = target_angle(gaze_plan[g].target).value_or(last_gaze_angle);
    if (g > 0 && t - gaze_plan[g].t < kSaccade) {
      const double from = target_angle(gaze_plan[g - 1].target).value_or(angle);
      double diff = std::remainder(angle - from, 2.0 * std::numbers::pi);
      angle = from + min_jerk((t - gaze_plan[g].t) / kSaccade) * diff;
    }
    last_gaze_angle = angle;
    const double jittered = angle + noise.normal(0.0, spec.noise.gaze);
    frame.gaze = perception::GazeEstimate::from(origin, Vec2(std::cos(jittered), std::sin(jittered)));

    trace.frames.push_back(std::move(frame));
  }
  return trace;
}

std::vector<ScenarioSpec> expand_mix(const CorpusMix& mix) {
  if (mix.manipulation < 0 || mix.distracted < 0 || mix.collision < 0 || mix.idle < 0 || mix.mixed < 0)
    throw ConfigError("mix counts must be non-negative");
  std::vector<std::pair<ScenarioKind, int>> left = {{ScenarioKind::Manipulation, mix.manipulation},
                                                     {ScenarioKind::Distracted, mix.distracted},
                                                     {ScenarioKind::Collision, mix.collision},
                                                     {ScenarioKind::Idle, mix.idle},
                                                     {ScenarioKind::Mixed, mix.mixed}};
  std::vector<ScenarioSpec> specs;
  bool any = true;
  while (any) {
    any = false;
    for (auto& [kind, count] : left) {
      if (count == 0) continue;
      --count;
      any = true;
      ScenarioSpec s;
      s.kind = kind;
      s.duration = mix.duration;
      s.seed = mix.seed * 1000003ULL + specs.size() + 1;
      specs.push_back(s);
    }
  }
  return specs;
}

std::string mix_to_json(const CorpusMix& mix) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["mix"] = {{"manipulation", mix.manipulation}, {"distracted", mix.distracted}, {"collision", mix.collision},
              {"idle", mix.idle},                 {"mixed", mix.mixed},           {"duration", mix.duration},
              {"seed", mix.seed}};
  return j.dump(2);
}

std::vector<ScenarioSpec> corpus_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("corpus file is not valid JSON: ") + e.what());
  }
  try {
    if (j.contains("mix")) {
      const auto& m = j["mix"];
      CorpusMix mix;
      mix.manipulation = m.value("manipulation", mix.manipulation);
      mix.distracted = m.value("distracted", mix.distracted);
      mix.collision = m.value("collision", mix.collision);
      mix.idle = m.value("idle", mix.idle);
      mix.mixed = m.value("mixed", mix.mixed);
      mix.duration = m.value("duration", mix.duration);
      mix.seed = m.value("seed", mix.seed);
      return expand_mix(mix);
    }
    if (j.contains("scenarios")) {
      std::vector<ScenarioSpec> specs;
      for (const auto& sj : j["scenarios"]) specs.push_back(spec_from_json(sj.dump()));
      return specs;
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed corpus file: ") + e.what());
  }
  throw ConfigError("corpus file needs a 'mix' or a 'scenarios' entry");
}

Corpus build_corpus(const std::vector<ScenarioSpec>& specs, const SceneConfig& scene, models::Exec exec) {
  if (specs.empty()) throw CorpusError("no scenarios");
  Corpus corpus;
  corpus.traces.resize(specs.size());
  std::vector<std::exception_ptr> errors(specs.size());
  const auto count = static_cast<std::ptrdiff_t>(specs.size());
#pragma omp parallel for schedule(dynamic) if (exec == models::Exec::Parallel)
  for (std::ptrdiff_t i = 0; i < count; ++i) {
    try {
      corpus.traces[static_cast<std::size_t>(i)] = generate(specs[static_cast<std::size_t>(i)], scene);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<ScenarioKind> kinds;
  for (const auto& s : specs)
    if (std::find(kinds.begin(), kinds.end(), s.kind) == kinds.end()) kinds.push_back(s.kind);
  if (kinds.size() < 2) throw CorpusError("a corpus needs at least two scenario kinds");
  corpus.dataset = traces::assemble_dataset(corpus.traces, scene);
  corpus.positives = corpus.dataset.data.positives();
  if (corpus.positives == 0 || corpus.positives == corpus.dataset.data.size())
    throw CorpusError("corpus has a single label class");
  return corpus;
}

}  // namespace intent::sim
