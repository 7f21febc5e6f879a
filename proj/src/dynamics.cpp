#include "armada/dynamics.hpp"

#include <cmath>

namespace armada {
namespace dyn {

namespace {

struct LinkKin {
  Vec3 o;   // joint frame origin, world
  Vec3 z;   // joint axis, world
  Vec3 c;   // com, world
  Mat3 Iw;  // com inertia, world
  Vec3 w, alpha, a_o, a_c;
};

}  // namespace

Vec6 inverse_dynamics(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      const Vec6& qddot, const Loads& loads) {
  const auto fk = kin::forward_kinematics(model, q);
  const int n = kNumJoints;
  std::vector<LinkKin> lk(static_cast<size_t>(n));

  // Outward pass. Folding gravity in as a base acceleration of -g makes the
  // Newton equations below gravity-complete without explicit weight terms.
  Vec3 w_prev = Vec3::Zero();
  Vec3 alpha_prev = Vec3::Zero();
  Vec3 a_prev = -loads.gravity;
  Vec3 o_prev = model.base_pose.p;
  for (int i = 0; i < n; ++i) {
    LinkKin& k = lk[static_cast<size_t>(i)];
    const Link& link = model.links[static_cast<size_t>(i)];
    const Pose& frame = fk.link_poses[static_cast<size_t>(i)];
    k.o = frame.p;
    k.z = frame.R * link.axis;
    k.c = frame * link.com;
    k.Iw = frame.R * link.inertia * frame.R.transpose();

    Vec3 r = k.o - o_prev;  // fixed in the parent link
    k.a_o = a_prev + alpha_prev.cross(r) + w_prev.cross(w_prev.cross(r));
    k.w = w_prev + k.z * qdot[i];
    k.alpha = alpha_prev + k.z * qddot[i] + w_prev.cross(k.z * qdot[i]);

    Vec3 rc = k.c - k.o;
    k.a_c = k.a_o + k.alpha.cross(rc) + k.w.cross(k.w.cross(rc));

    w_prev = k.w;
    alpha_prev = k.alpha;
    a_prev = k.a_o;
    o_prev = k.o;
  }

  // EE point rides on the last link; the gripper and payload are point
  // masses there, and the external wrench enters with opposite sign.
  const LinkKin& tip = lk.back();
  Vec3 p_ee = fk.ee.p;
  Vec3 r_ee = p_ee - tip.o;
  Vec3 a_ee =
      tip.a_o + tip.alpha.cross(r_ee) + tip.w.cross(tip.w.cross(r_ee));
  double m_tip = model.gripper_mass + loads.payload_mass;

  Vec6 tau;
  Vec3 f_child = m_tip * a_ee - loads.ee_wrench.head<3>();
  Vec3 n_child = -loads.ee_wrench.tail<3>();  // moment about p_ee
  Vec3 p_child = p_ee;
  for (int i = n - 1; i >= 0; --i) {
    const LinkKin& k = lk[static_cast<size_t>(i)];
    const Link& link = model.links[static_cast<size_t>(i)];
    Vec3 F = link.mass * k.a_c;
    Vec3 N = k.Iw * k.alpha + k.w.cross(k.Iw * k.w);
    Vec3 f = F + f_child;
    Vec3 moment = N + n_child + (k.c - k.o).cross(F) +
                  (p_child - k.o).cross(f_child);
    tau[i] = k.z.dot(moment);
    f_child = f;
    n_child = moment;
    p_child = k.o;
  }
  return tau;
}

Mat6 mass_matrix(const RobotModel& model, const Vec6& q, double payload_mass) {
  Loads noload;
  noload.gravity.setZero();
  noload.payload_mass = payload_mass;
  Mat6 M;
  for (int j = 0; j < kNumJoints; ++j) {
    Vec6 e = Vec6::Zero();
    e[j] = 1.0;
    M.col(j) = inverse_dynamics(model, q, Vec6::Zero(), e, noload);
  }
  // Symmetrize away the last bits of floating-point asymmetry.
  return 0.5 * (M + M.transpose());
}

Vec6 bias_torques(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                  const Loads& loads) {
  return inverse_dynamics(model, q, qdot, Vec6::Zero(), loads);
}

Vec6 forward_dynamics(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      const Vec6& tau, const Loads& loads) {
  Mat6 M = mass_matrix(model, q, loads.payload_mass);
  Vec6 rhs = tau - bias_torques(model, q, qdot, loads);
  Eigen::LDLT<Mat6> ldlt(M);
  if (ldlt.info() != Eigen::Success)
    throw Error(ErrorKind::Numeric, "mass matrix not positive definite");
  Vec6 qddot = ldlt.solve(rhs);
  for (int i = 0; i < kNumJoints; ++i)
    if (!std::isfinite(qddot[i]))
      throw Error(ErrorKind::Numeric,
                  "forward dynamics produced a non-finite acceleration at "
                  "joint " + std::to_string(i + 1));
  return qddot;
}

double kinetic_energy(const RobotModel& model, const Vec6& q, const Vec6& qdot,
                      double payload_mass) {
  return 0.5 * qdot.dot(mass_matrix(model, q, payload_mass) * qdot);
}

double potential_energy(const RobotModel& model, const Vec6& q,
                        const Loads& loads) {
  const auto fk = kin::forward_kinematics(model, q);
  double e = 0.0;
  for (size_t i = 0; i < model.links.size(); ++i) {
    Vec3 c = fk.link_poses[i] * model.links[i].com;
    e -= model.links[i].mass * loads.gravity.dot(c);
  }
  e -= (model.gripper_mass + loads.payload_mass) * loads.gravity.dot(fk.ee.p);
  return e;
}

}  // namespace dyn
}  // namespace armada
