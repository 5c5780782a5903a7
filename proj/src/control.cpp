#include "intent/control.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace intent::control {

namespace {

void require_size(const Eigen::VectorXd& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw InputShapeError(std::string(what) + " has " + std::to_string(v.size()) +
                          " entries, expected " + std::to_string(n));
}

}  // namespace

ArmState ArmState::at_rest(const Eigen::VectorXd& q) {
  ArmState s;
  s.q = q;
  s.q_dot = Eigen::VectorXd::Zero(q.size());
  s.q_d = q;
  s.q_dot_d = Eigen::VectorXd::Zero(q.size());
  s.tau = Eigen::VectorXd::Zero(q.size());
  return s;
}

GainPresets GainPresets::defaults(std::size_t dof) {
  const auto n = static_cast<Eigen::Index>(dof);
  GainPresets g;
  g.compliant.kp = Eigen::VectorXd::Constant(n, 5.0);
  g.compliant.kd = Eigen::VectorXd::Constant(n, 2.0);
  g.stiff.kp = Eigen::VectorXd::Constant(n, 200.0);
  g.stiff.kd = Eigen::VectorXd::Constant(n, 20.0);
  return g;
}

void validate(const GainPresets& g) {
  const auto n = g.compliant.kp.size();
  for (const auto* v : {&g.compliant.kd, &g.stiff.kp, &g.stiff.kd})
    if (v->size() != n) throw ConfigError("gain vectors must share one length");
  for (const auto* v : {&g.compliant.kp, &g.compliant.kd, &g.stiff.kp, &g.stiff.kd})
    if ((v->array() <= 0.0).any()) throw ConfigError("gains must be strictly positive");
  if ((g.stiff.kp.array() <= g.compliant.kp.array()).any())
    throw ConfigError("stiff preset must be stiffer than the compliant preset on every joint");
}

Eigen::VectorXd impedance_torque(const ArmState& s, const ImpedanceGains& g) {
  const auto n = s.q.size();
  require_size(s.q_dot, n, "q_dot");
  require_size(s.q_d, n, "q_d");
  require_size(s.q_dot_d, n, "q_dot_d");
  require_size(g.kp, n, "kp");
  require_size(g.kd, n, "kd");
  return -(g.kp.array() * (s.q - s.q_d).array()) - g.kd.array() * (s.q_dot - s.q_dot_d).array();
}

const ImpedanceGains& safety_update(Intention intention, ArmState& arm, SafetyStopState& stop,
                                    const GainPresets& gains) {
  if (intention != stop.previous) {
    arm.q_d = arm.q;
    arm.q_dot_d = Eigen::VectorXd::Zero(arm.q.size());
    stop.previous = intention;
  }
  stop.mode = stop.previous == Intention::Intentional ? Mode::Compliant : Mode::Stiff;
  return stop.mode == Mode::Compliant ? gains.compliant : gains.stiff;
}

ArmState integrate(const ArmState& arm, const Eigen::VectorXd& tau_command,
                   const Eigen::VectorXd& tau_external, double dt, const Eigen::VectorXd& inertia) {
  if (!(dt > 0.0)) throw ParameterError("integration step must be positive");
  if ((inertia.array() <= 0.0).any()) throw ParameterError("inertia must be positive");
  const auto n = arm.q.size();
  require_size(tau_command, n, "tau_command");
  require_size(tau_external, n, "tau_external");
  require_size(inertia, n, "inertia");
  ArmState next = arm;
  next.q_dot = arm.q_dot.array() + dt * (tau_command + tau_external).array() / inertia.array();
  next.q = arm.q + dt * next.q_dot;
  next.tau = tau_command;
  return next;
}

double max_passive_dt(const ImpedanceGains& g, const Eigen::VectorXd& inertia) {
  double dt = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < g.kp.size(); ++i) {
    const double m = inertia[i];
    const double c = g.kd[i] / m;
    const double k = g.kp[i] / m;
    dt = std::min(dt, 2.0 * c / (c * c + k));
  }
  return dt;
}

Eigen::VectorXd HumanPushModel::torque(const Eigen::VectorXd& target, const Eigen::VectorXd& q,
                                       const Eigen::VectorXd& q_dot) const {
  require_size(target, q.size(), "push target");
  require_size(q_dot, q.size(), "joint velocity");
  return (stiffness * (target - q) - damping * q_dot).cwiseMax(-torque_limit).cwiseMin(torque_limit);
}

ArmState advance(const ArmState& arm, const ImpedanceGains& gains, const Eigen::VectorXd* push_target,
                 const HumanPushModel& push, double span, double control_dt, const Eigen::VectorXd& inertia) {
  if (!(span > 0.0) || !(control_dt > 0.0)) throw ParameterError("advance needs positive time spans");
  const int substeps = std::max(1, static_cast<int>(std::lround(span / control_dt)));
  const double dt = span / substeps;
  ArmState s = arm;
  Eigen::VectorXd tau_ext = Eigen::VectorXd::Zero(s.q.size());
  for (int i = 0; i < substeps; ++i) {
    if (push_target) tau_ext = push.torque(*push_target, s.q, s.q_dot);
    s = integrate(s, impedance_torque(s, gains), tau_ext, dt, inertia);
  }
  return s;
}

}  // namespace intent::control
