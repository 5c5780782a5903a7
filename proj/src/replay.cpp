#include "intent/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "intent/control.hpp"
#include "intent/kinematics.hpp"
#include "intent/pipeline.hpp"

namespace intent::replay {

namespace {

int pushed_arm(const traces::Trace& trace) {
  for (const auto& f : trace.frames)
    if (f.push) return f.push->arm;
  return 0;
}

}  // namespace

ReplayResult run_replay(const traces::Trace& trace, const models::Classifier& model, const SceneConfig& scene_in,
                        const ReplayOptions& options) {
  SceneConfig scene = scene_in;
  if (options.window) {
    scene.pipeline.window_span = *options.window;
    validate(scene.pipeline);
  }
  ReplayResult out;
  out.log.header = trace.header;
  out.log.control = options.control;
  if (trace.frames.empty()) {
    out.verdict.scenario = trace.header.scenario ? std::string(sim::kind_name(trace.header.scenario->kind)) : "unknown";
    out.verdict.summary = "empty trace";
    return out;
  }

  const int a = pushed_arm(trace);
  if (a < 0 || static_cast<std::size_t>(a) >= scene.arms.size()) throw InputShapeError("push references a missing arm");
  const auto& arm = scene.arms[static_cast<std::size_t>(a)];

  pipeline::Pipeline pipe(scene, model);
  control::ArmState state = control::ArmState::at_rest(trace.frames.front().q[static_cast<std::size_t>(a)]);
  control::SafetyStopState stop;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(arm.chain.dof()));

  Vec3 prev_ee = kinematics::end_effector(arm, state.q);
  for (std::size_t i = 0; i < trace.frames.size(); ++i) {
    const auto& frame = trace.frames[i];
    const auto step = pipe.step(frame);

    // The controller reads the published intention, as a separate control
    // thread would.
    const control::ImpedanceGains* gains = &scene.gains.compliant;
    control::Mode mode = control::Mode::Compliant;
    if (options.control) {
      gains = &control::safety_update(pipe.latest_intention(), state, stop, scene.gains);
      mode = stop.mode;
    }

    Eigen::VectorXd tau_ext = zero;
    if (frame.push && frame.push->arm == a) tau_ext = scene.push.torque(frame.push->target, state.q, state.q_dot);

    traces::ReplayRecord rec;
    rec.features = step.features;
    rec.raw = step.raw;
    rec.score = step.score;
    rec.smoothed = step.smoothed;
    rec.intention = step.intention;
    rec.mode = mode;
    rec.arm = a;
    rec.q = state.q;
    rec.ee = kinematics::end_effector(arm, state.q);
    if (i > 0) rec.ee_velocity = (rec.ee - prev_ee) / (frame.t - trace.frames[i - 1].t);
    rec.force = tau_ext.norm();
    prev_ee = rec.ee;
    out.log.frames.push_back(frame);
    out.log.records.push_back(std::move(rec));

    if (i + 1 == trace.frames.size()) break;
    const Eigen::VectorXd* target = frame.push && frame.push->arm == a ? &frame.push->target : nullptr;
    state = control::advance(state, *gains, target, scene.push, trace.frames[i + 1].t - frame.t, scene.control_dt,
                             scene.inertia);
  }

  auto& v = out.verdict;
  const auto& spec = trace.header.scenario;
  v.scenario = spec ? std::string(sim::kind_name(spec->kind)) : "unknown";
  if (spec && (spec->kind == sim::ScenarioKind::Distracted || spec->kind == sim::ScenarioKind::Mixed) &&
      spec->schedule.distraction)
    v.interval = spec->schedule.distraction;
  else if (spec && spec->kind == sim::ScenarioKind::Collision && spec->schedule.contact)
    v.interval = spec->schedule.contact;

  const auto& recs = out.log.records;
  const auto& frames = out.log.frames;
  if (v.interval && v.scenario != "collision") {
    // Displacement while the user looks away, measured from where the arm was
    // when the distraction began.
    std::optional<Vec3> ref;
    std::size_t n = 0, stiff = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      if (!v.interval->contains(frames[i].t)) continue;
      if (!ref) ref = recs[i].ee;
      v.deviation = std::max(v.deviation, (recs[i].ee - *ref).norm());
      ++n;
      stiff += recs[i].mode == control::Mode::Stiff;
    }
    if (n) v.stiff_fraction = static_cast<double>(stiff) / static_cast<double>(n);
  } else {
    std::size_t n = 0, stiff = 0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      v.deviation = std::max(v.deviation, (recs[i].ee - recs.front().ee).norm());
      if (v.interval && !v.interval->contains(frames[i].t)) continue;
      ++n;
      stiff += recs[i].mode == control::Mode::Stiff;
    }
    if (n) v.stiff_fraction = static_cast<double>(stiff) / static_cast<double>(n);
  }
  char buf[256];
  std::snprintf(buf, sizeof buf, "scenario=%s control=%s frames=%zu deviation=%.4f m stiff_fraction=%.3f",
                v.scenario.c_str(), options.control ? "on" : "off", recs.size(), v.deviation, v.stiff_fraction);
  v.summary = buf;
  return out;
}

}  // namespace intent::replay
