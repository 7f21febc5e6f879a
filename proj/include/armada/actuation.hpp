#pragma once

#include "armada/model.hpp"
#include "armada/types.hpp"

namespace armada {
namespace act {

struct PdGains {
  Vec6 kp = Vec6::Zero();  // N*m/rad
  Vec6 kd = Vec6::Zero();  // N*m*s/rad

  static PdGains constant(double kp, double kd) {
    PdGains g;
    g.kp.setConstant(kp);
    g.kd.setConstant(kd);
    return g;
  }
};

/// tau_j = clamp(kp_j (q_des_j - q_j) - kd_j qdot_j, +-limit_j).
Vec6 pd_torque(const PdGains& gains, const Vec6& q_des, const Vec6& q,
               const Vec6& qdot, const Vec6& torque_limit);

/// Same, with limits taken from the model's joint specs.
Vec6 pd_torque(const RobotModel& model, const PdGains& gains,
               const Vec6& q_des, const Vec6& q, const Vec6& qdot);

/// Joint torques that hold the arm static at q with a payload lumped at the
/// gripper tip (gravity only, zero velocity and acceleration).
Vec6 gravity_torques(const RobotModel& model, const Vec6& q,
                     double payload_mass);

/// Per-actuator |required current| / nominal current for a joint torque
/// vector. Torque is reflected through the coupling (tau_act = C^T tau_joint)
/// and converted to current with each joint's calibration table, which maps
/// current to torque at the geared output.
Vec6 current_ratios(const RobotModel& model, const Vec6& tau_joint);

}  // namespace act
}  // namespace armada
