#pragma once

#include "armada/kinematics.hpp"
#include "armada/model.hpp"
#include "armada/types.hpp"

namespace armada {
namespace dyn {

/// Loads shared by the dynamics routines. The gripper mass from the model is
/// always lumped at the EE point; payload_mass adds to it. ee_wrench is the
/// wrench the environment applies to the arm at the EE point, stacked
/// (force; torque) in world coordinates.
struct Loads {
  Vec3 gravity = Vec3(0, 0, -kStandardGravity);  // m/s^2
  double payload_mass = 0.0;                     // kg, at the EE point
  Vec6 ee_wrench = Vec6::Zero();
};

/// Recursive Newton-Euler over the 6-link chain: the joint torques that
/// realize qddot at (q, qdot) under the given loads.
Vec6 inverse_dynamics(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      const Vec6& qddot, const Loads& loads = {});

/// Joint-space mass matrix, assembled column by column from unit-qddot
/// inverse dynamics with gravity and external loads off.
Mat6 mass_matrix(const RobotModel& model, const Vec6& q,
                 double payload_mass = 0.0);

/// Coriolis + gravity - J^T w terms: inverse_dynamics with qddot = 0.
Vec6 bias_torques(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                  const Loads& loads = {});

/// Solves M(q) qddot = tau - bias for qddot. Throws Error(Numeric) naming
/// the first joint with a non-finite result or a singular mass matrix.
Vec6 forward_dynamics(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      const Vec6& tau, const Loads& loads = {});

/// 0.5 qdot^T M qdot with the payload folded in.
double kinetic_energy(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      double payload_mass = 0.0);

/// Sum of m_i g h_i over links, gripper, and payload; zero reference at the
/// world origin.
double potential_energy(const RobotModel& model, const Vec6& q,
                        const Loads& loads = {});

}  // namespace dyn
}  // namespace armada
