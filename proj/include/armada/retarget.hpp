#pragma once

#include <string>
#include <vector>

#include "armada/model.hpp"
#include "armada/types.hpp"

namespace armada {
namespace rt {

/// Elbow/wrist targets for one arm at one instant, already in world
/// coordinates on the robot side.
struct KeypointFrame {
  double t = 0.0;
  Vec3 elbow = Vec3::Zero();
  Vec3 wrist = Vec3::Zero();
};

/// One captured human frame, both arms, raw capture coordinates (m).
struct HumanFrame {
  double t = 0.0;
  Vec3 left_shoulder, left_elbow, left_wrist;
  Vec3 right_shoulder, right_elbow, right_wrist;
};

struct RetargetConfig {
  double w_elbow = 0.5;
  double w_wrist = 1.0;
  double lambda = 1e-4;      // damping
  double dt = 0.005;         // s, integration step
  double vel_scale = 1.0;    // fraction of joint velocity limits available
  double tol = 1e-4;         // m, per-frame convergence tolerance
  int max_iters = 30;        // iterations per frame
};

/// Similarity map for one arm: human shoulder to the robot shoulder origin,
/// then uniform scaling. Pass the same scale for both arms so the inter-hand
/// vector stays rigid; robot_shoulder_scale() computes it once.
KeypointFrame map_human_to_robot(double t, const Vec3& human_shoulder,
                                 const Vec3& human_elbow,
                                 const Vec3& human_wrist, double scale,
                                 const RobotModel& model);

/// (robot shoulder-to-wrist length at zero config) / human_arm_length.
/// Throws Error(InvalidArgument) for a degenerate human arm (< 1 cm).
double shoulder_scale(const RobotModel& model, double human_arm_length);

/// Damped-least-squares velocity over the stacked elbow/wrist positional
/// Jacobians; clamped to vel_scale * velocity limits, motion into a position
/// limit zeroed.
Vec6 retarget_step(const RobotModel& model, const Vec6& q,
                   const KeypointFrame& frame, const RetargetConfig& config);

struct TrajectoryPoint {
  double t = 0.0;
  Vec6 q = Vec6::Zero();
  Vec6 qdot = Vec6::Zero();  // finite-difference over frame times
  double elbow_err = 0.0;    // m, after this frame's iterations
  double wrist_err = 0.0;    // m
};

/// Per-frame iterative tracking: q <- q + retarget_step * dt until the task
/// error stalls or max_iters is hit, then the next frame. qdot is reported
/// against the frame clock.
std::vector<TrajectoryPoint> retarget_trajectory(
    const RobotModel& model, const std::vector<KeypointFrame>& frames,
    const RetargetConfig& config, const Vec6& q0);

/// JSON-lines keypoint file: one frame per line,
/// {"t":..,"left":{"shoulder":[x,y,z],"elbow":[..],"wrist":[..]},"right":{..}}
/// Timestamps must be strictly increasing.
std::vector<HumanFrame> load_keypoints_jsonl(const std::string& path);
std::vector<HumanFrame> parse_keypoints_jsonl(const std::string& text);

}  // namespace rt
}  // namespace armada
