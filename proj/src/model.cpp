#include "armada/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace armada {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] void invariant_error(const std::string& what) {
  throw Error(ErrorKind::Invariant, what);
}

}  // namespace

const CalibrationTable& RobotModel::calibration_for(int joint) const {
  const auto& id = actuators.at(static_cast<size_t>(joint)).calibration_id;
  auto it = calibrations.find(id);
  if (it == calibrations.end())
    throw Error(ErrorKind::InvalidArgument,
                "unknown calibration id '" + id + "' for joint " +
                    std::to_string(joint + 1));
  return it->second;
}

void RobotModel::validate() const {
  if (links.size() != kNumJoints)
    invariant_error("expected 6 joints, got " + std::to_string(links.size()));
  if (joints.size() != links.size() || actuators.size() != links.size())
    invariant_error("joints/actuators not aligned with links");
  for (size_t i = 0; i < links.size(); ++i) {
    const Link& l = links[i];
    const std::string tag = "link " + std::to_string(i + 1) +
                            (l.name.empty() ? "" : " (" + l.name + ")");
    if (l.parent != static_cast<int>(i) - 1)
      invariant_error(tag + ": parent must form a serial chain");
    if (std::abs(l.axis.norm() - 1.0) > 1e-9)
      invariant_error(tag + ": axis must be unit norm, got |axis| = " +
                      fmt(l.axis.norm()));
    if (l.mass < 0.0) invariant_error(tag + ": mass must be >= 0");
    Eigen::SelfAdjointEigenSolver<Mat3> es(l.inertia);
    if (es.eigenvalues().minCoeff() < -1e-12)
      invariant_error(tag + ": inertia must be positive semidefinite");
    const JointSpec& j = joints[i];
    if (!(j.lower < j.upper))
      invariant_error(tag + ": joint_limits lower must be < upper");
    if (!(j.velocity_limit > 0.0))
      invariant_error(tag + ": velocity_limit must be > 0");
    if (!(j.torque_limit > 0.0))
      invariant_error(tag + ": torque_limit must be > 0");
    const ActuatorSpec& a = actuators[i];
    if (!(a.gear_ratio > 0.0)) invariant_error(tag + ": gear_ratio must be > 0");
    if (!(a.nominal_current > 0.0))
      invariant_error(tag + ": nominal_current must be > 0");
    if (calibrations.find(a.calibration_id) == calibrations.end())
      invariant_error(tag + ": calibration id '" + a.calibration_id +
                      "' not defined");
  }
  Eigen::FullPivLU<Mat6> lu(coupling);
  if (!lu.isInvertible()) invariant_error("coupling matrix is singular");
  if (gripper_mass < 0.0) invariant_error("gripper_mass must be >= 0");
  for (const auto& [id, table] : calibrations) {
    try {
      table.validate();
    } catch (const Error& e) {
      invariant_error("calibration '" + id + "': " + e.what());
    }
  }
}

void SceneModel::validate() const {
  auto positive = [](double v, const char* field) {
    if (!(v > 0.0))
      invariant_error(std::string(field) + " must be > 0, got " + fmt(v));
  };
  positive(table_length, "table_length");
  positive(table_depth, "table_depth");
  positive(table_height, "table_height");
  positive(bump_height, "bump_height");
  positive(bump_thickness, "bump_thickness");
  positive(cube_edge, "cube_edge");
  positive(cube_mass, "cube_mass");
  positive(card_dims.x(), "card_dims.x");
  positive(card_dims.y(), "card_dims.y");
  positive(card_dims.z(), "card_dims.z");
  positive(card_mass, "card_mass");
  positive(gravity, "gravity");
  if (object_friction < 0.0 || table_friction < 0.0)
    invariant_error("friction coefficients must be >= 0");
}

// ---------------------------------------------------------------------------
// Structured-text description format.
//
// Line oriented, UTF-8. `key value...` pairs grouped under `[section]`
// headers; `#` starts a comment. Sections: [arm] once, [link] six times in
// chain order, [coupling] optional (identity if absent), [calibration <id>]
// per table. Scene files use a single [scene] section.
// ---------------------------------------------------------------------------

namespace {

struct Line {
  int number;
  std::string key;
  std::vector<std::string> values;
};

[[noreturn]] void parse_error(int line, const std::string& what) {
  throw Error(ErrorKind::Parse,
              "line " + std::to_string(line) + ": " + what);
}

double to_double(const Line& ln, size_t idx) {
  const std::string& s = ln.values.at(idx);
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    parse_error(ln.number, "field '" + ln.key + "': bad number '" + s + "'");
  }
}

void need_values(const Line& ln, size_t n) {
  if (ln.values.size() != n)
    parse_error(ln.number, "field '" + ln.key + "' expects " +
                               std::to_string(n) + " values, got " +
                               std::to_string(ln.values.size()));
}

Pose pose_from(const Line& ln) {
  need_values(ln, 6);
  return Pose::from_xyz_rpy(to_double(ln, 0), to_double(ln, 1),
                            to_double(ln, 2), to_double(ln, 3),
                            to_double(ln, 4), to_double(ln, 5));
}

struct Section {
  int line;
  std::string name;   // e.g. "link", "calibration"
  std::string arg;    // e.g. the calibration id
  std::vector<Line> lines;
};

std::vector<Section> tokenize(const std::string& text) {
  std::vector<Section> sections;
  sections.push_back({0, "", "", {}});  // top-level (format_version)
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    std::istringstream ls(raw);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok.front() == '[') {
      std::string rest = tok.substr(1);
      std::string arg;
      std::string extra;
      while (ls >> extra) arg += (arg.empty() ? "" : " ") + extra;
      if (!arg.empty() && arg.back() == ']') arg.pop_back();
      else if (!rest.empty() && rest.back() == ']') rest.pop_back();
      else parse_error(number, "unterminated section header");
      sections.push_back({number, rest, arg, {}});
      continue;
    }
    Line ln{number, tok, {}};
    while (ls >> tok) ln.values.push_back(tok);
    sections.back().lines.push_back(ln);
  }
  return sections;
}

int check_format_version(const Section& top) {
  for (const Line& ln : top.lines) {
    if (ln.key == "format_version") {
      need_values(ln, 1);
      int v = static_cast<int>(to_double(ln, 0));
      if (v != 1)
        parse_error(ln.number,
                    "unsupported format_version " + std::to_string(v));
      return v;
    }
    parse_error(ln.number, "unexpected key '" + ln.key + "' before a section");
  }
  throw Error(ErrorKind::Parse, "missing format_version");
}

}  // namespace

RobotModel load_model(const std::string& text) {
  auto sections = tokenize(text);
  check_format_version(sections.front());

  RobotModel model;
  bool saw_arm = false;
  bool saw_coupling = false;
  for (size_t si = 1; si < sections.size(); ++si) {
    const Section& sec = sections[si];
    if (sec.name == "arm") {
      saw_arm = true;
      for (const Line& ln : sec.lines) {
        if (ln.key == "name") {
          need_values(ln, 1);
          model.name = ln.values[0];
        } else if (ln.key == "gripper_mass") {
          need_values(ln, 1);
          model.gripper_mass = to_double(ln, 0);
        } else if (ln.key == "base_pose") {
          model.base_pose = pose_from(ln);
        } else if (ln.key == "ee_offset") {
          model.ee_offset = pose_from(ln);
        } else {
          parse_error(ln.number, "unknown [arm] key '" + ln.key + "'");
        }
      }
    } else if (sec.name == "link") {
      Link link;
      JointSpec joint;
      ActuatorSpec act;
      link.parent = static_cast<int>(model.links.size()) - 1;
      for (const Line& ln : sec.lines) {
        if (ln.key == "name") {
          need_values(ln, 1);
          link.name = ln.values[0];
        } else if (ln.key == "origin") {
          link.origin = pose_from(ln);
        } else if (ln.key == "axis") {
          need_values(ln, 3);
          link.axis = Vec3(to_double(ln, 0), to_double(ln, 1), to_double(ln, 2));
        } else if (ln.key == "mass") {
          need_values(ln, 1);
          link.mass = to_double(ln, 0);
        } else if (ln.key == "com") {
          need_values(ln, 3);
          link.com = Vec3(to_double(ln, 0), to_double(ln, 1), to_double(ln, 2));
        } else if (ln.key == "inertia") {
          need_values(ln, 6);  // Ixx Iyy Izz Ixy Ixz Iyz
          double xx = to_double(ln, 0), yy = to_double(ln, 1),
                 zz = to_double(ln, 2), xy = to_double(ln, 3),
                 xz = to_double(ln, 4), yz = to_double(ln, 5);
          link.inertia << xx, xy, xz, xy, yy, yz, xz, yz, zz;
        } else if (ln.key == "joint_limits") {
          need_values(ln, 2);
          joint.lower = to_double(ln, 0);
          joint.upper = to_double(ln, 1);
        } else if (ln.key == "velocity_limit") {
          need_values(ln, 1);
          joint.velocity_limit = to_double(ln, 0);
        } else if (ln.key == "torque_limit") {
          need_values(ln, 1);
          joint.torque_limit = to_double(ln, 0);
        } else if (ln.key == "gear_ratio") {
          need_values(ln, 1);
          act.gear_ratio = to_double(ln, 0);
        } else if (ln.key == "nominal_current") {
          need_values(ln, 1);
          act.nominal_current = to_double(ln, 0);
        } else if (ln.key == "calibration") {
          need_values(ln, 1);
          act.calibration_id = ln.values[0];
        } else {
          parse_error(ln.number, "unknown [link] key '" + ln.key + "'");
        }
      }
      model.links.push_back(link);
      model.joints.push_back(joint);
      model.actuators.push_back(act);
    } else if (sec.name == "coupling") {
      saw_coupling = true;
      int row = 0;
      for (const Line& ln : sec.lines) {
        if (ln.key != "row")
          parse_error(ln.number, "unknown [coupling] key '" + ln.key + "'");
        need_values(ln, 6);
        if (row >= 6) parse_error(ln.number, "more than 6 coupling rows");
        for (int c = 0; c < 6; ++c)
          model.coupling(row, c) = to_double(ln, static_cast<size_t>(c));
        ++row;
      }
      if (row != 6)
        parse_error(sec.line, "coupling needs 6 rows, got " +
                                  std::to_string(row));
    } else if (sec.name == "calibration") {
      if (sec.arg.empty())
        parse_error(sec.line, "[calibration] needs an id: [calibration <id>]");
      CalibrationTable table;
      for (const Line& ln : sec.lines) {
        if (ln.key != "sample")
          parse_error(ln.number, "unknown [calibration] key '" + ln.key + "'");
        need_values(ln, 2);
        table.samples.emplace_back(to_double(ln, 0), to_double(ln, 1));
      }
      model.calibrations[sec.arg] = table;
    } else {
      parse_error(sec.line, "unknown section [" + sec.name + "]");
    }
  }
  if (!saw_arm) throw Error(ErrorKind::Parse, "missing [arm] section");
  (void)saw_coupling;
  model.validate();
  return model;
}

RobotModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open model file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_model(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

namespace {

void write_pose(std::ostringstream& out, const char* key, const Pose& pose) {
  // Recover fixed-axis rpy from R = Rz(yaw)*Ry(pitch)*Rx(roll).
  double pitch = std::asin(-std::clamp(pose.R(2, 0), -1.0, 1.0));
  double roll, yaw;
  if (std::abs(std::cos(pitch)) > 1e-9) {
    roll = std::atan2(pose.R(2, 1), pose.R(2, 2));
    yaw = std::atan2(pose.R(1, 0), pose.R(0, 0));
  } else {
    roll = std::atan2(-pose.R(1, 2), pose.R(1, 1));
    yaw = 0.0;
  }
  out << key << " " << fmt(pose.p.x()) << " " << fmt(pose.p.y()) << " "
      << fmt(pose.p.z()) << " " << fmt(roll) << " " << fmt(pitch) << " "
      << fmt(yaw) << "\n";
}

}  // namespace

std::string serialize_model(const RobotModel& model) {
  std::ostringstream out;
  out << "format_version 1\n\n[arm]\n";
  out << "name " << model.name << "\n";
  out << "gripper_mass " << fmt(model.gripper_mass) << "\n";
  write_pose(out, "base_pose", model.base_pose);
  write_pose(out, "ee_offset", model.ee_offset);
  for (size_t i = 0; i < model.links.size(); ++i) {
    const Link& l = model.links[i];
    const JointSpec& j = model.joints[i];
    const ActuatorSpec& a = model.actuators[i];
    out << "\n[link]\n";
    out << "name " << l.name << "\n";
    write_pose(out, "origin", l.origin);
    out << "axis " << fmt(l.axis.x()) << " " << fmt(l.axis.y()) << " "
        << fmt(l.axis.z()) << "\n";
    out << "mass " << fmt(l.mass) << "\n";
    out << "com " << fmt(l.com.x()) << " " << fmt(l.com.y()) << " "
        << fmt(l.com.z()) << "\n";
    out << "inertia " << fmt(l.inertia(0, 0)) << " " << fmt(l.inertia(1, 1))
        << " " << fmt(l.inertia(2, 2)) << " " << fmt(l.inertia(0, 1)) << " "
        << fmt(l.inertia(0, 2)) << " " << fmt(l.inertia(1, 2)) << "\n";
    out << "joint_limits " << fmt(j.lower) << " " << fmt(j.upper) << "\n";
    out << "velocity_limit " << fmt(j.velocity_limit) << "\n";
    out << "torque_limit " << fmt(j.torque_limit) << "\n";
    out << "gear_ratio " << fmt(a.gear_ratio) << "\n";
    out << "nominal_current " << fmt(a.nominal_current) << "\n";
    out << "calibration " << a.calibration_id << "\n";
  }
  out << "\n[coupling]\n";
  for (int r = 0; r < 6; ++r) {
    out << "row";
    for (int c = 0; c < 6; ++c) out << " " << fmt(model.coupling(r, c));
    out << "\n";
  }
  for (const auto& [id, table] : model.calibrations) {
    out << "\n[calibration " << id << "]\n";
    for (const auto& [cur, tor] : table.samples)
      out << "sample " << fmt(cur) << " " << fmt(tor) << "\n";
  }
  return out.str();
}

SceneModel load_scene(const std::string& text) {
  auto sections = tokenize(text);
  check_format_version(sections.front());
  SceneModel scene;
  bool saw_scene = false;
  for (size_t si = 1; si < sections.size(); ++si) {
    const Section& sec = sections[si];
    if (sec.name != "scene")
      parse_error(sec.line, "unknown section [" + sec.name + "]");
    saw_scene = true;
    for (const Line& ln : sec.lines) {
      auto scalar = [&](double* field) {
        need_values(ln, 1);
        *field = to_double(ln, 0);
      };
      if (ln.key == "table_length") scalar(&scene.table_length);
      else if (ln.key == "table_depth") scalar(&scene.table_depth);
      else if (ln.key == "table_height") scalar(&scene.table_height);
      else if (ln.key == "table_center_x") scalar(&scene.table_center_x);
      else if (ln.key == "bump_height") scalar(&scene.bump_height);
      else if (ln.key == "bump_thickness") scalar(&scene.bump_thickness);
      else if (ln.key == "cube_edge") scalar(&scene.cube_edge);
      else if (ln.key == "cube_mass") scalar(&scene.cube_mass);
      else if (ln.key == "card_mass") scalar(&scene.card_mass);
      else if (ln.key == "object_friction") scalar(&scene.object_friction);
      else if (ln.key == "table_friction") scalar(&scene.table_friction);
      else if (ln.key == "gravity") scalar(&scene.gravity);
      else if (ln.key == "card_dims") {
        need_values(ln, 3);
        scene.card_dims =
            Vec3(to_double(ln, 0), to_double(ln, 1), to_double(ln, 2));
      } else {
        parse_error(ln.number, "unknown [scene] key '" + ln.key + "'");
      }
    }
  }
  if (!saw_scene) throw Error(ErrorKind::Parse, "missing [scene] section");
  scene.validate();
  return scene;
}

SceneModel load_scene_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open scene file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return load_scene(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string serialize_scene(const SceneModel& s) {
  std::ostringstream out;
  out << "format_version 1\n\n[scene]\n";
  out << "table_length " << fmt(s.table_length) << "\n";
  out << "table_depth " << fmt(s.table_depth) << "\n";
  out << "table_height " << fmt(s.table_height) << "\n";
  out << "table_center_x " << fmt(s.table_center_x) << "\n";
  out << "bump_height " << fmt(s.bump_height) << "\n";
  out << "bump_thickness " << fmt(s.bump_thickness) << "\n";
  out << "cube_edge " << fmt(s.cube_edge) << "\n";
  out << "cube_mass " << fmt(s.cube_mass) << "\n";
  out << "card_dims " << fmt(s.card_dims.x()) << " " << fmt(s.card_dims.y())
      << " " << fmt(s.card_dims.z()) << "\n";
  out << "card_mass " << fmt(s.card_mass) << "\n";
  out << "object_friction " << fmt(s.object_friction) << "\n";
  out << "table_friction " << fmt(s.table_friction) << "\n";
  out << "gravity " << fmt(s.gravity) << "\n";
  return out.str();
}

// ---------------------------------------------------------------------------
// Built-in model.
// ---------------------------------------------------------------------------

CalibrationTable default_calibration(const std::string& id) {
  CalibrationTable t;
  if (id == "ak70_10") {
    // Heavy base actuator, ~0.95 N*m/A at the geared output.
    t.samples = {{0.4, 0.33}, {2.0, 1.86}, {4.0, 3.78},
                 {8.0, 7.60}, {12.0, 11.40}, {16.0, 15.08}};
  } else if (id == "rmd_x4") {
    // Light wrist actuator, ~0.55 N*m/A at the geared output.
    t.samples = {{0.3, 0.18}, {1.0, 0.56}, {2.0, 1.12},
                 {3.0, 1.66}, {4.5, 2.44}};
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "unknown built-in calibration '" + id + "'");
  }
  return t;
}

namespace {

Mat3 rod_inertia(double mass, double length) {
  // Slender rod along local x, about its com.
  double i = mass * length * length / 12.0;
  Mat3 m = Mat3::Zero();
  m(0, 0) = 1e-5 + mass * 1e-4;
  m(1, 1) = i + 1e-5;
  m(2, 2) = i + 1e-5;
  return m;
}

Link make_link(const std::string& name, int parent, const Vec3& origin,
               const Vec3& axis, double mass, const Vec3& com, double rod_len,
               double rotor_inertia) {
  Link l;
  l.name = name;
  l.parent = parent;
  l.origin = Pose::from_translation(origin);
  l.axis = axis;
  l.mass = mass;
  l.com = com;
  // The geared rotor (J_r * G^2 at the output) acts about the joint axis and
  // dominates the small distal links.
  l.inertia = rod_inertia(mass, rod_len) +
              rotor_inertia * (axis * axis.transpose());
  return l;
}

}  // namespace

RobotModel default_armada_model() {
  RobotModel m;
  m.name = "armada";
  m.gripper_mass = 0.29;
  m.base_pose = Pose::from_translation({0.0, 0.0, 0.62});
  m.ee_offset = Pose::from_translation({0.02, 0.0, 0.0});

  // Zero configuration: arm straight out along +x. Moving mass (upper arm
  // onward) sums to 1.09 kg; the two shoulder gimbal frames carry the
  // body-mounted actuators and contribute no moving mass.
  // Reflected rotor inertia J_r G^2 about each joint axis. This also sets
  // the stability floor for the 200 Hz held PD: kd_max * dt / M must stay
  // under 2, so even the wrist joints need ~1e-2 kg m^2.
  const double rotor = 1.2e-2;
  m.links.push_back(make_link("shoulder_yaw", -1, {0, 0, 0}, Vec3::UnitZ(),
                              0.0, {0, 0, 0}, 0.01, rotor));
  m.links.push_back(make_link("shoulder_pitch", 0, {0, 0, 0}, Vec3::UnitY(),
                              0.0, {0, 0, 0}, 0.01, rotor));
  m.links.push_back(make_link("upper_arm", 1, {0, 0, 0}, Vec3::UnitX(), 0.45,
                              {0.14, 0, 0}, 0.28, rotor));
  m.links.push_back(make_link("forearm", 2, {0.28, 0, 0}, Vec3::UnitY(), 0.40,
                              {0.14, 0, 0}, 0.28, rotor));
  m.links.push_back(make_link("wrist", 3, {0.28, 0, 0}, Vec3::UnitY(), 0.14,
                              {0.01, 0, 0}, 0.04, rotor));
  m.links.push_back(make_link("ee_hub", 4, {0.02, 0, 0}, Vec3::UnitX(), 0.10,
                              {0.01, 0, 0}, 0.04, rotor));

  m.joints = {
      {-2.96, 2.96, 20.0, 24.0},   // shoulder yaw
      {-1.90, 2.10, 20.0, 24.0},   // shoulder pitch
      {-2.96, 2.96, 20.0, 24.0},   // shoulder roll
      {-2.60, 2.60, 20.0, 24.0},   // elbow (driven from the base)
      {-1.80, 1.80, 25.0, 8.0},    // wrist pitch
      {-2.96, 2.96, 25.0, 8.0},    // wrist roll
  };
  m.actuators = {
      {10.0, 12.0, "ak70_10"}, {10.0, 12.0, "ak70_10"},
      {10.0, 12.0, "ak70_10"}, {10.0, 12.0, "ak70_10"},
      {10.0, 2.5, "rmd_x4"},   {10.0, 2.5, "rmd_x4"},
  };

  // Parallelogram drive: the base-mounted elbow actuator moves the elbow
  // joint relative to the base frame, so the joint angle subtracts the
  // shoulder pitch coordinate. Torque transfer stays 1:1.
  m.coupling = Mat6::Identity();
  m.coupling(3, 1) = -1.0;

  m.calibrations["ak70_10"] = default_calibration("ak70_10");
  m.calibrations["rmd_x4"] = default_calibration("rmd_x4");
  m.validate();
  return m;
}

SceneModel default_scene() {
  SceneModel s;
  s.validate();
  return s;
}

Vec6 lifting_posture() {
  Vec6 q = Vec6::Zero();
  q[1] = M_PI / 2.0;   // upper arm straight down
  q[3] = -M_PI / 2.0;  // forearm horizontal forward
  return q;
}

}  // namespace armada
