#include "intent/pipeline.hpp"

#include <cmath>
#include <string>

#include "intent/kinematics.hpp"

namespace intent::pipeline {

namespace {
// Timestamps come from a fixed-rate clock as k / rate; without a little slack a
// sample exactly one span old can survive through rounding.
constexpr double kWindowEps = 1e-9;
}  // namespace

IntentionState::IntentionState(double span, double threshold) : span_(span), threshold_(threshold) {
  validate(PipelineConfig{span, threshold});
}

Intention IntentionState::update(double t, int raw_label, double raw_score) {
  if (!std::isfinite(t)) throw StreamOrderError("non-finite timestamp");
  if (!window_.empty() && !(t > window_.back().t))
    throw StreamOrderError("frame timestamp " + std::to_string(t) + " does not advance");
  const int label = raw_label != 0 ? 1 : 0;
  window_.push_back({t, label});
  positives_ += label;
  while (!(window_.front().t > t - span_ + kWindowEps)) {
    positives_ -= window_.front().label;
    window_.pop_front();
  }
  raw_score_ = raw_score;
  const Intention next = smoothed() > threshold_ ? Intention::Intentional : Intention::Unintentional;
  if (next != intention_) {
    intention_ = next;
    last_transition_ = t;
  }
  return intention_;
}

void IntentionState::reset() {
  window_.clear();
  positives_ = 0;
  raw_score_ = 0.0;
  intention_ = Intention::Unintentional;
  last_transition_.reset();
}

// The mean runs over the newest odd number of samples in the window, which
// rules out a 50/50 tie at the default threshold.
std::size_t IntentionState::count() const { return window_.size() - (window_.size() % 2 == 0 && !window_.empty()); }

double IntentionState::smoothed() const {
  if (window_.empty()) return 0.0;
  const int pos = positives_ - (count() < window_.size() ? window_.front().label : 0);
  return static_cast<double>(pos) / static_cast<double>(count());
}

Observation observe(const SceneConfig& scene, const TraceFrame& frame) {
  using perception::Joint;
  if (frame.gamma.size() != scene.layout.count())
    throw InputShapeError("frame has " + std::to_string(frame.gamma.size()) + " touch bits, layout has " +
                          std::to_string(scene.layout.count()));
  if (frame.q.size() != scene.arms.size())
    throw InputShapeError("frame has joint vectors for " + std::to_string(frame.q.size()) + " arms, scene has " +
                          std::to_string(scene.arms.size()));

  Observation obs;
  auto& in = obs.inputs;
  in.t = frame.t;
  in.snapshot.gamma = frame.gamma;
  in.snapshot.positions = kinematics::sensor_world_positions(scene.layout, scene.arms, frame.q);
  in.gaze = frame.gaze;

  perception::Skeleton sk = frame.skeleton;
  perception::project_skeleton(sk, scene.camera);
  obs.skeleton = perception::validate_skeleton(sk, scene.limb_bounds);
  if (obs.skeleton.accepted) {
    in.wrists.left = sk.world(Joint::LWrist);
    in.wrists.right = sk.world(Joint::RWrist);
    if (in.wrists.left) {
      const auto& kp = sk[Joint::LWrist];
      in.pois.pois.push_back({"left_hand", features::PoiKind::HandLeft, Vec2(kp.u, kp.v), in.wrists.left});
    }
    if (in.wrists.right) {
      const auto& kp = sk[Joint::RWrist];
      in.pois.pois.push_back({"right_hand", features::PoiKind::HandRight, Vec2(kp.u, kp.v), in.wrists.right});
    }
  }

  for (const auto& p : scene.pois) {
    if (p.kind == PoiConfig::Kind::Static) {
      in.pois.pois.push_back({p.name, features::PoiKind::Static, p.pixel, std::nullopt});
      continue;
    }
    const auto a = static_cast<std::size_t>(p.arm);
    const Vec3 ee = kinematics::end_effector(scene.arms[a], frame.q[a]);
    const Vec3 cam = scene.camera.world_from_camera.inverse() * ee;
    if (cam.z() <= 0.0) continue;  // behind the camera: not a visible target
    in.pois.pois.push_back(
        {p.name, features::PoiKind::Static, perception::to_pixel(cam, scene.camera.intrinsics).pixel, std::nullopt});
  }
  return obs;
}

Pipeline::Pipeline(SceneConfig scene, models::Classifier model)
    : scene_(std::move(scene)),
      model_(std::move(model)),
      state_(scene_.pipeline.window_span, scene_.pipeline.threshold) {}

StepResult Pipeline::step(const TraceFrame& frame) {
  if (!state_.window().empty() && !(frame.t > state_.window().back().t))
    throw StreamOrderError("frame timestamp " + std::to_string(frame.t) + " does not advance");
  const Observation obs = observe(scene_, frame);
  StepResult r;
  r.t = frame.t;
  r.skeleton_ok = obs.skeleton.accepted;
  r.features = features::extract(obs.inputs, models::scaling_of(model_), stream_);
  const models::Prediction p = models::predict(model_, r.features);
  r.raw = p.label;
  r.score = p.score;
  r.intention = state_.update(frame.t, p.label, p.score);
  r.smoothed = state_.smoothed();
  {
    std::lock_guard lock(publish_mu_);
    latest_ = r;
  }
  return r;
}

void Pipeline::reset() {
  stream_.reset();
  state_.reset();
  std::lock_guard lock(publish_mu_);
  latest_.reset();
}

std::optional<StepResult> Pipeline::latest() const {
  std::lock_guard lock(publish_mu_);
  return latest_;
}

Intention Pipeline::latest_intention() const {
  std::lock_guard lock(publish_mu_);
  return latest_ ? latest_->intention : Intention::Unintentional;
}

}  // namespace intent::pipeline
