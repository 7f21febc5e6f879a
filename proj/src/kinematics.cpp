#include "armada/kinematics.hpp"

namespace armada {
namespace kin {

FkResult forward_kinematics(const RobotModel& model, const Vec6& q) {
  FkResult out;
  out.link_poses.reserve(model.links.size());
  Pose world = model.base_pose;
  for (size_t i = 0; i < model.links.size(); ++i) {
    const Link& link = model.links[i];
    world = world * link.origin;
    world.R = world.R * rotation_exp(link.axis * q[static_cast<int>(i)]);
    out.link_poses.push_back(world);
  }
  out.ee = world * model.ee_offset;
  return out;
}

Pose ee_pose(const RobotModel& model, const Vec6& q) {
  return forward_kinematics(model, q).ee;
}

Mat6 geometric_jacobian(const RobotModel& model, const Vec6& q) {
  FkResult fk = forward_kinematics(model, q);
  Mat6 J;
  for (int i = 0; i < kNumJoints; ++i) {
    const Pose& frame = fk.link_poses[static_cast<size_t>(i)];
    Vec3 z = frame.R * model.links[static_cast<size_t>(i)].axis;
    Vec3 r = fk.ee.p - frame.p;
    J.block<3, 1>(0, i) = z.cross(r);
    J.block<3, 1>(3, i) = z;
  }
  return J;
}

Eigen::Matrix<double, 3, 6> point_jacobian(const RobotModel& model,
                                           const Vec6& q, int link_index,
                                           const Vec3& point_world) {
  FkResult fk = forward_kinematics(model, q);
  Eigen::Matrix<double, 3, 6> J = Eigen::Matrix<double, 3, 6>::Zero();
  for (int i = 0; i <= link_index; ++i) {
    const Pose& frame = fk.link_poses[static_cast<size_t>(i)];
    Vec3 z = frame.R * model.links[static_cast<size_t>(i)].axis;
    J.col(i) = z.cross(point_world - frame.p);
  }
  return J;
}

Keypoints keypoints(const RobotModel& model, const Vec6& q) {
  FkResult fk = forward_kinematics(model, q);
  Keypoints kp;
  kp.elbow = fk.link_poses[kElbow].p;
  kp.wrist = fk.link_poses[kWristPitch].p;
  kp.ee = fk.ee.p;
  return kp;
}

Vec6 actuator_to_joint(const RobotModel& model, const Vec6& q_act) {
  return model.coupling * q_act;
}

Vec6 joint_to_actuator(const RobotModel& model, const Vec6& q_joint) {
  return model.coupling.partialPivLu().solve(q_joint);
}

Vec6 joint_torque_to_actuator(const RobotModel& model, const Vec6& tau_joint) {
  return model.coupling.transpose() * tau_joint;
}

}  // namespace kin
}  // namespace armada
