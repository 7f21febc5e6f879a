#pragma once

#include <vector>

#include "armada/model.hpp"
#include "armada/types.hpp"

namespace armada {

struct JointState {
  Vec6 q = Vec6::Zero();     // rad
  Vec6 qdot = Vec6::Zero();  // rad/s
};

namespace kin {

struct FkResult {
  std::vector<Pose> link_poses;  // world pose of each joint frame, size 6
  Pose ee;                       // world pose of the gripper tip
};

/// World poses composed left to right along the chain; the end-effector pose
/// includes the model's ee offset. Joint limits are not enforced here.
FkResult forward_kinematics(const RobotModel& model, const Vec6& q);

Pose ee_pose(const RobotModel& model, const Vec6& q);

/// World-frame geometric Jacobian at the end-effector origin, rows stacked
/// (linear; angular). Column i = (z_i x (p_ee - p_i); z_i).
Mat6 geometric_jacobian(const RobotModel& model, const Vec6& q);

/// 3-row positional Jacobian of an arbitrary point rigidly attached to
/// `link_index` (point given in world coordinates at configuration q).
Eigen::Matrix<double, 3, 6> point_jacobian(const RobotModel& model,
                                           const Vec6& q, int link_index,
                                           const Vec3& point_world);

struct Keypoints {
  Vec3 elbow;  // elbow joint frame origin, world
  Vec3 wrist;  // wrist joint frame origin, world
  Vec3 ee;     // gripper tip, world
};

Keypoints keypoints(const RobotModel& model, const Vec6& q);

/// Chain indices of the named frames in the built-in joint ordering.
inline constexpr int kShoulderYaw = 0;
inline constexpr int kShoulderPitch = 1;
inline constexpr int kShoulderRoll = 2;
inline constexpr int kElbow = 3;
inline constexpr int kWristPitch = 4;
inline constexpr int kWristRoll = 5;

/// q_joint = C * q_act.
Vec6 actuator_to_joint(const RobotModel& model, const Vec6& q_act);
/// q_act = C^-1 * q_joint.
Vec6 joint_to_actuator(const RobotModel& model, const Vec6& q_joint);
/// tau_act = C^T * tau_joint; conserves mechanical power exactly.
Vec6 joint_torque_to_actuator(const RobotModel& model, const Vec6& tau_joint);

}  // namespace kin
}  // namespace armada
