#pragma once

#include <map>
#include <string>
#include <vector>

#include "armada/calibration.hpp"
#include "armada/types.hpp"

namespace armada {

struct Link {
  std::string name;
  int parent = -1;             // link index of parent, -1 = arm base
  Pose origin;                 // parent joint frame -> this joint frame
  Vec3 axis = Vec3::UnitZ();   // joint rotation axis in the link frame
  double mass = 0.0;           // kg
  Vec3 com = Vec3::Zero();     // m, in the link frame
  Mat3 inertia = Mat3::Zero();  // kg*m^2 about the com, in the link frame
};

struct JointSpec {
  double lower = -3.14;          // rad
  double upper = 3.14;           // rad
  double velocity_limit = 10.0;  // rad/s
  double torque_limit = 10.0;    // N*m
};

struct ActuatorSpec {
  double gear_ratio = 10.0;
  double nominal_current = 1.0;  // A
  std::string calibration_id;
};

/// One 6 DoF arm: a serial revolute chain with three shoulder joints, one
/// elbow, and two wrist joints. The coupling matrix maps actuator
/// displacements to joint displacements (q_joint = C * q_act); the default
/// model couples the elbow joint to a base-mounted actuator through a
/// parallelogram link, so the elbow row subtracts the shoulder pitch
/// coordinate while every other row is identity.
struct RobotModel {
  std::string name = "arm";
  std::vector<Link> links;              // exactly 6, chain order
  std::vector<JointSpec> joints;        // aligned with links
  std::vector<ActuatorSpec> actuators;  // aligned with links
  Mat6 coupling = Mat6::Identity();
  Pose base_pose;       // arm base in the world frame
  Pose ee_offset;       // last link frame -> end-effector (gripper tip)
  double gripper_mass = 0.0;  // kg, lumped at the end-effector
  std::map<std::string, CalibrationTable> calibrations;

  const CalibrationTable& calibration_for(int joint) const;
  void validate() const;  // throws Error(Invariant) naming the field
};

/// Tabletop scene: a table box standing on the ground, a bump strip running
/// across the table depth that splits it into a left and a right half, and
/// the manipulated objects.
struct SceneModel {
  double table_length = 0.84;    // lateral extent, world y (m)
  double table_depth = 0.40;     // forward extent, world x (m)
  double table_height = 0.40;    // top surface above ground (m)
  double table_center_x = 0.35;  // table center forward of the arm base (m)
  double bump_height = 0.025;    // m
  double bump_thickness = 0.04;  // lateral extent of the strip (m)
  double cube_edge = 0.090;      // m
  double cube_mass = 0.25;       // kg
  Vec3 card_dims{0.0856, 0.0540, 0.001};  // m
  double card_mass = 0.005;      // kg
  double object_friction = 0.5;
  double table_friction = 0.4;
  double gravity = 9.81;  // m/s^2, downward

  void validate() const;
};

// Structured-text descriptions (see data/*.model and README for the schema).
RobotModel load_model(const std::string& text);
RobotModel load_model_file(const std::string& path);
std::string serialize_model(const RobotModel& model);

SceneModel load_scene(const std::string& text);
SceneModel load_scene_file(const std::string& path);
std::string serialize_scene(const SceneModel& scene);

/// Built-in single-arm model. Link lengths (0.28 m upper arm, 0.28 m forearm,
/// 0.04 m wrist-to-EE) and the mass split are estimates chosen to match the
/// published moving mass of 1.09 kg and a 0.60 m straight reach; override via
/// a model file for different hardware. The two wrist actuator frames are a
/// modelling choice as well (pitch at the forearm tip, roll 2 cm beyond).
RobotModel default_armada_model();

SceneModel default_scene();

/// Synthetic current-torque tables for the two built-in actuator types,
/// with slopes near vendor torque constant x gear ratio. Replace with
/// measured CSVs for real hardware.
CalibrationTable default_calibration(const std::string& id);

/// Bicep-curl hold: upper arm straight down, forearm horizontal forward.
Vec6 lifting_posture();

}  // namespace armada
