#include "armada/retarget.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "armada/kinematics.hpp"

namespace armada {
namespace rt {

double shoulder_scale(const RobotModel& model, double human_arm_length) {
  if (human_arm_length < 0.01)
    throw Error(ErrorKind::InvalidArgument,
                "degenerate human arm length (< 1 cm)");
  auto fk = kin::forward_kinematics(model, Vec6::Zero());
  double robot_len =
      (fk.link_poses[kin::kWristPitch].p - model.base_pose.p).norm();
  return robot_len / human_arm_length;
}

KeypointFrame map_human_to_robot(double t, const Vec3& human_shoulder,
                                 const Vec3& human_elbow,
                                 const Vec3& human_wrist, double scale,
                                 const RobotModel& model) {
  KeypointFrame out;
  out.t = t;
  Vec3 robot_shoulder = model.base_pose.p;
  out.elbow = robot_shoulder + scale * (human_elbow - human_shoulder);
  out.wrist = robot_shoulder + scale * (human_wrist - human_shoulder);
  return out;
}

namespace {

struct TaskState {
  Vec3 p_elbow, p_wrist;
};

TaskState task_points(const RobotModel& model, const Vec6& q) {
  auto fk = kin::forward_kinematics(model, q);
  return {fk.link_poses[kin::kElbow].p, fk.link_poses[kin::kWristPitch].p};
}

}  // namespace

Vec6 retarget_step(const RobotModel& model, const Vec6& q,
                   const KeypointFrame& frame, const RetargetConfig& config) {
  TaskState cur = task_points(model, q);
  // The elbow point rides on the upper arm, the wrist point on the forearm.
  auto J_elbow = kin::point_jacobian(model, q, kin::kElbow - 1, cur.p_elbow);
  auto J_wrist =
      kin::point_jacobian(model, q, kin::kWristPitch - 1, cur.p_wrist);

  Vec3 v_elbow = (frame.elbow - cur.p_elbow) / config.dt;
  Vec3 v_wrist = (frame.wrist - cur.p_wrist) / config.dt;

  Mat6 A = config.lambda * Mat6::Identity();
  Vec6 rhs = Vec6::Zero();
  A += config.w_elbow * J_elbow.transpose() * J_elbow;
  A += config.w_wrist * J_wrist.transpose() * J_wrist;
  rhs += config.w_elbow * J_elbow.transpose() * v_elbow;
  rhs += config.w_wrist * J_wrist.transpose() * v_wrist;

  Vec6 qdot = A.ldlt().solve(rhs);
  for (int i = 0; i < kNumJoints; ++i) {
    const JointSpec& js = model.joints[static_cast<size_t>(i)];
    double vmax = js.velocity_limit * config.vel_scale;
    qdot[i] = std::clamp(qdot[i], -vmax, vmax);
    if (q[i] >= js.upper && qdot[i] > 0.0) qdot[i] = 0.0;
    if (q[i] <= js.lower && qdot[i] < 0.0) qdot[i] = 0.0;
  }
  return qdot;
}

std::vector<TrajectoryPoint> retarget_trajectory(
    const RobotModel& model, const std::vector<KeypointFrame>& frames,
    const RetargetConfig& config, const Vec6& q0) {
  for (size_t i = 1; i < frames.size(); ++i)
    if (!(frames[i].t > frames[i - 1].t))
      throw Error(ErrorKind::InvalidArgument,
                  "keypoint timestamps must be strictly increasing (frame " +
                      std::to_string(i + 1) + ")");
  for (int i = 0; i < kNumJoints; ++i) {
    const JointSpec& js = model.joints[static_cast<size_t>(i)];
    if (q0[i] < js.lower - 1e-9 || q0[i] > js.upper + 1e-9)
      throw Error(ErrorKind::InvalidArgument,
                  "q0 outside joint limits at joint " + std::to_string(i + 1));
  }

  std::vector<TrajectoryPoint> out;
  out.reserve(frames.size());
  Vec6 q = q0;
  Vec6 q_prev = q0;
  double t_prev = frames.empty() ? 0.0 : frames.front().t;
  for (const KeypointFrame& frame : frames) {
    for (int it = 0; it < config.max_iters; ++it) {
      TaskState cur = task_points(model, q);
      double err = std::max((frame.elbow - cur.p_elbow).norm(),
                            (frame.wrist - cur.p_wrist).norm());
      if (err < config.tol) break;
      Vec6 qdot = retarget_step(model, q, frame, config);
      q += config.dt * qdot;
      for (int i = 0; i < kNumJoints; ++i) {
        const JointSpec& js = model.joints[static_cast<size_t>(i)];
        q[i] = std::clamp(q[i], js.lower, js.upper);
      }
    }
    TaskState cur = task_points(model, q);
    TrajectoryPoint pt;
    pt.t = frame.t;
    pt.q = q;
    double frame_dt = frame.t - t_prev;
    pt.qdot = frame_dt > 0.0 ? Vec6((q - q_prev) / frame_dt) : Vec6::Zero();
    pt.elbow_err = (frame.elbow - cur.p_elbow).norm();
    pt.wrist_err = (frame.wrist - cur.p_wrist).norm();
    out.push_back(pt);
    q_prev = q;
    t_prev = frame.t;
  }
  return out;
}

namespace {

Vec3 vec3_from_json(const nlohmann::json& j, const char* field, int line) {
  if (!j.is_array() || j.size() != 3)
    throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": '" +
                                      field + "' must be [x, y, z]");
  return Vec3(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

}  // namespace

std::vector<HumanFrame> parse_keypoints_jsonl(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  std::vector<HumanFrame> frames;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) + ": " + e.what());
    }
    try {
      HumanFrame f;
      f.t = j.at("t").get<double>();
      const auto& l = j.at("left");
      const auto& r = j.at("right");
      f.left_shoulder = vec3_from_json(l.at("shoulder"), "shoulder", number);
      f.left_elbow = vec3_from_json(l.at("elbow"), "elbow", number);
      f.left_wrist = vec3_from_json(l.at("wrist"), "wrist", number);
      f.right_shoulder = vec3_from_json(r.at("shoulder"), "shoulder", number);
      f.right_elbow = vec3_from_json(r.at("elbow"), "elbow", number);
      f.right_wrist = vec3_from_json(r.at("wrist"), "wrist", number);
      frames.push_back(f);
    } catch (const Error&) {
      throw;
    } catch (const std::exception& e) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) + ": " + e.what());
    }
    if (frames.size() > 1 &&
        !(frames.back().t > frames[frames.size() - 2].t))
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) +
                      ": timestamps must be strictly increasing");
  }
  if (frames.empty())
    throw Error(ErrorKind::Parse, "keypoint file has no frames");
  return frames;
}

std::vector<HumanFrame> load_keypoints_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open keypoint file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_keypoints_jsonl(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace rt
}  // namespace armada
