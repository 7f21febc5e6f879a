#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "armada/actuation.hpp"
#include "armada/kinematics.hpp"
#include "armada/model.hpp"
#include "armada/rng.hpp"
#include "armada/types.hpp"

namespace armada {
namespace sim {

/// One free rigid body with a box or sphere collision shape. Static bodies
/// (dynamic = false) never move and need no mass properties.
struct RigidBodyState {
  std::string name;
  Pose pose;                        // body frame at the com
  Vec3 v = Vec3::Zero();            // com velocity, world m/s
  Vec3 w = Vec3::Zero();            // angular velocity, world rad/s
  double mass = 1.0;                // kg
  Mat3 inertia = Mat3::Identity();  // about the com, body frame
  Vec3 half_extents = Vec3::Zero(); // box shape; ignored for spheres
  double radius = 0.0;              // sphere shape when > 0
  double friction = 0.5;
  double restitution = 0.0;         // kept for completeness; damping absorbs
  bool dynamic = true;

  bool is_sphere() const { return radius > 0.0; }
};

/// A steady external push on one body, held until changed. Used by tests and
/// scripted probes; cleared world has none.
struct ExternalForce {
  int body = -1;
  Vec3 force = Vec3::Zero();  // world N
  Vec3 point = Vec3::Zero();  // world application point
};

struct WorldState {
  JointState arm;
  std::vector<RigidBodyState> bodies;
  std::vector<ExternalForce> external_forces;
  double time = 0.0;
  bool arm_enabled = true;
};

struct SimConfig {
  double dt = 1.0 / 200.0;      // controller step, s
  int substeps = 10;            // controller steps per policy tick
  int micro_steps = 4;          // integration slices inside one dt
  double penalty_stiffness = 2.0e4;  // N/m ceiling per contact
  double damping_ratio = 0.7;
  double v_reg = 0.01;          // m/s, friction regularization knee
  double gravity = kStandardGravity;
  bool contacts_enabled = true;
  bool joint_stops_enabled = true;
  bool velocity_limits_enabled = true;
  double ee_radius = 0.02;      // m, gripper tip collision proxy
  double ee_contact_mass = 0.01;  // kg, tip-side effective mass for contact
                                  // stiffness; small because the PD holds its
                                  // damping term across a whole controller
                                  // step and the wrist inertia is tiny
  double torque_noise_std = 0.0;  // N*m, per controller step when > 0
};

/// One resolved contact from the most recent step, for audits.
struct ContactRecord {
  Vec3 point;
  Vec3 normal;     // unit, pointing into body a
  double fn = 0.0; // N, >= 0
  Vec3 ft = Vec3::Zero();
  double depth = 0.0;
  double stiffness = 0.0;  // the clamped per-contact spring rate actually used
  double mu = 0.0;
  int body_a = -1;  // receives +fn*normal (+ft); -2 marks the arm EE
  int body_b = -1;
};

struct StepInfo {
  std::vector<ContactRecord> contacts;
};

/// Advances the world by one controller step (cfg.dt) of semi-implicit
/// Euler, sliced into cfg.micro_steps equal pieces for contact stability.
/// tau_cmd is held over the whole step; torque noise (if configured) is
/// sampled once per call from rng. Throws Error(Numeric) when a state goes
/// non-finite, naming the simulation time.
void step(WorldState& world, const RobotModel& model, const Vec6& tau_cmd,
          const SimConfig& cfg, Rng* rng = nullptr, StepInfo* info = nullptr);

/// Total arm mechanical energy (kinetic + potential), for audits.
double arm_energy(const RobotModel& model, const WorldState& world,
                  double gravity = kStandardGravity);

// --- Domain randomization --------------------------------------------------

struct DrConfig {
  bool enabled = false;
  double table_dz = 0.01;      // table height += U[-table_dz, table_dz] m
  double friction_lo = 0.7;    // object friction *= U[lo, hi]
  double friction_hi = 1.3;
  double mass_lo = 0.7;        // object mass *= U[lo, hi]
  double mass_hi = 1.3;
  double joint_pos_std = 0.05; // rad, added to q at reset
  double joint_vel_std = 0.05; // rad/s, added to qdot at reset
  double ee_obs_std = 0.05;    // m, EE position observation offset
  double torque_std = 0.1;     // N*m, per controller step
};

/// The concrete draw applied to one episode. ee_obs_offset is not applied to
/// the physics; the observation builder adds it.
struct DrSample {
  double table_dz = 0.0;
  double friction_scale = 1.0;
  double mass_scale = 1.0;
  Vec6 joint_pos_noise = Vec6::Zero();
  Vec6 joint_vel_noise = Vec6::Zero();
  Vec3 ee_obs_offset = Vec3::Zero();
  double torque_noise_std = 0.0;
};

DrSample sample_dr(const DrConfig& dr, Rng& rng);

/// Applies a sample in place: shifts every body whose name starts with
/// "table" or "bump" (and anything resting logic must follow separately),
/// scales the named object's friction and mass, and perturbs the arm state.
/// Disabled configs leave the world bit-exact.
void apply_dr(WorldState& world, const DrSample& sample, int object_index);

// --- Trajectory dump ---------------------------------------------------------

/// CSV header + rows `t,q1..q6,qd1..qd6,obj_x,obj_y,obj_z,obj_qw,obj_qx,
/// obj_qy,obj_qz`. With no object (index < 0) the pose columns read
/// 0 0 0 1 0 0 0.
void write_dump_header(std::ostream& out);
void write_dump_row(std::ostream& out, const WorldState& world,
                    int object_index);

}  // namespace sim
}  // namespace armada
