#pragma once

#include <optional>

#include <Eigen/Core>

#include "intent/common.hpp"

namespace intent::control {

struct ArmState {
  Eigen::VectorXd q;
  Eigen::VectorXd q_dot;
  Eigen::VectorXd q_d;
  Eigen::VectorXd q_dot_d;
  Eigen::VectorXd tau;  // last commanded torque

  static ArmState at_rest(const Eigen::VectorXd& q);
  std::size_t dof() const { return static_cast<std::size_t>(q.size()); }
};

struct ImpedanceGains {
  Eigen::VectorXd kp;  // N m / rad
  Eigen::VectorXd kd;  // N m s / rad
};

struct GainPresets {
  ImpedanceGains compliant;  // low stiffness, intentional touch
  ImpedanceGains stiff;      // high stiffness, safety stop

  static GainPresets defaults(std::size_t dof);
};

void validate(const GainPresets& g);

// tau = -kp .* (q - q_d) - kd .* (q_dot - q_dot_d)
Eigen::VectorXd impedance_torque(const ArmState& s, const ImpedanceGains& g);

enum class Mode { Compliant, Stiff };

struct SafetyStopState {
  Mode mode = Mode::Stiff;
  Intention previous = Intention::Unintentional;
};

// On an intention change the setpoint snaps to the current configuration with
// zero desired velocity and the stiffness preset switches. Returns the preset
// now active.
const ImpedanceGains& safety_update(Intention intention, ArmState& arm, SafetyStopState& stop,
                                    const GainPresets& gains);

// Semi-implicit Euler: q_dot += dt (tau_cmd + tau_ext) / inertia; q += dt q_dot.
ArmState integrate(const ArmState& arm, const Eigen::VectorXd& tau_command,
                   const Eigen::VectorXd& tau_external, double dt, const Eigen::VectorXd& inertia);

// Largest step for which the spring-damper energy of every joint is
// non-increasing under integrate() with no external torque: dt < 2 kd / (kd^2 + kp)
// for unit inertia, scaled by inertia otherwise.
double max_passive_dt(const ImpedanceGains& g, const Eigen::VectorXd& inertia);

// A person pushing an arm towards a target: a saturated joint-space
// spring-damper.
struct HumanPushModel {
  double stiffness = 40.0;    // N m / rad
  double damping = 8.0;       // N m s / rad
  double torque_limit = 3.0;  // N m per joint

  Eigen::VectorXd torque(const Eigen::VectorXd& target, const Eigen::VectorXd& q,
                         const Eigen::VectorXd& q_dot) const;
};

// Advances the arm over one frame interval in control_dt substeps with fixed
// gains. A push target, if given, acts through the push model at every
// substep.
ArmState advance(const ArmState& arm, const ImpedanceGains& gains, const Eigen::VectorXd* push_target,
                 const HumanPushModel& push, double span, double control_dt, const Eigen::VectorXd& inertia);

}  // namespace intent::control
