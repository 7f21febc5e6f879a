#include "armada/actuation.hpp"

#include <cmath>

#include "armada/dynamics.hpp"

namespace armada {
namespace act {

Vec6 pd_torque(const PdGains& gains, const Vec6& q_des, const Vec6& q,
               const Vec6& qdot, const Vec6& torque_limit) {
  Vec6 tau;
  for (int i = 0; i < kNumJoints; ++i) {
    double raw = gains.kp[i] * (q_des[i] - q[i]) - gains.kd[i] * qdot[i];
    tau[i] = std::clamp(raw, -torque_limit[i], torque_limit[i]);
  }
  return tau;
}

Vec6 pd_torque(const RobotModel& model, const PdGains& gains,
               const Vec6& q_des, const Vec6& q, const Vec6& qdot) {
  Vec6 limits;
  for (int i = 0; i < kNumJoints; ++i)
    limits[i] = model.joints[static_cast<size_t>(i)].torque_limit;
  return pd_torque(gains, q_des, q, qdot, limits);
}

Vec6 gravity_torques(const RobotModel& model, const Vec6& q,
                     double payload_mass) {
  if (payload_mass < 0.0)
    throw Error(ErrorKind::InvalidArgument, "payload_mass must be >= 0");
  dyn::Loads loads;
  loads.payload_mass = payload_mass;
  return dyn::inverse_dynamics(model, q, Vec6::Zero(), Vec6::Zero(), loads);
}

Vec6 current_ratios(const RobotModel& model, const Vec6& tau_joint) {
  Vec6 tau_act = kin::joint_torque_to_actuator(model, tau_joint);
  Vec6 ratios;
  for (int i = 0; i < kNumJoints; ++i) {
    const auto& table = model.calibration_for(i);
    double current = current_from_torque(table, tau_act[i]);
    ratios[i] =
        std::abs(current) / model.actuators[static_cast<size_t>(i)].nominal_current;
  }
  return ratios;
}

}  // namespace act
}  // namespace armada
