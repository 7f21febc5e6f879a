#include <cmath>

#include "armada/actuation.hpp"
#include "armada/env.hpp"
#include "armada/kinematics.hpp"
#include "armada/simcore.hpp"

namespace armada {
namespace env {

namespace {

class ZeroPolicy : public Policy {
 public:
  Action act(const Observation&) override {
    Action a;
    a.kp.setConstant(30.0);
    a.kd.setConstant(1.0);
    return a;
  }
  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<ZeroPolicy>(*this);
  }
};

class RandomPolicy : public Policy {
 public:
  explicit RandomPolicy(const ActionBounds& bounds) : bounds_(bounds) {}

  void reseed(std::uint64_t seed) override { rng_ = Rng(seed); }

  Action act(const Observation&) override {
    Action a;
    for (int i = 0; i < kNumJoints; ++i) {
      a.dq[i] = rng_.uniform(-bounds_.dq_max, bounds_.dq_max);
      a.kp[i] = rng_.uniform(0.0, bounds_.kp_max);
      a.kd[i] = rng_.uniform(0.0, bounds_.kd_max);
    }
    return a;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<RandomPolicy>(*this);
  }

 private:
  ActionBounds bounds_;
  Rng rng_{0};
};

// Tip-target state machine turned into joint residuals with one damped
// least-squares step per tick.
class ScriptedPushPolicy : public Policy {
 public:
  ScriptedPushPolicy(RobotModel model, SceneModel scene, Task task)
      : model_(std::move(model)), scene_(std::move(scene)), task_(task) {}

  void reseed(std::uint64_t) override { phase_ = Phase::Approach; }

  Action act(const Observation& obs) override {
    Vec3 obj = centroid(obs.object_keypoints);
    Vec3 goal = centroid(obs.goal_keypoints);
    double top = scene_.table_height;  // DR-shifted height is unobservable
    Vec3 tip = kin::keypoints(model_, obs.q).ee;

    Vec3 target;
    if (task_ == Task::Bump) {
      Vec3 dir = push_dir(obj, goal);
      double standoff = scene_.cube_edge / 2.0 + 0.03;
      Vec3 behind = obj - standoff * dir;
      behind.z() = top + 0.6 * scene_.cube_edge;
      double dist = (goal.head<2>() - obj.head<2>()).norm();
      switch (phase_) {
        case Phase::Approach: {
          Vec3 staging = behind;
          staging.z() = top + scene_.cube_edge + 0.06;
          target = staging;
          // Climb before translating so a restage never sweeps through the
          // cube on its way to the far side.
          if (tip.z() < staging.z() - 0.01) target.head<2>() = tip.head<2>();
          if ((tip.head<2>() - behind.head<2>()).norm() < 0.02)
            phase_ = Phase::Engage;
          break;
        }
        case Phase::Engage:
          target = behind;
          if (std::abs(tip.z() - behind.z()) < 0.015) phase_ = Phase::Drive;
          break;
        case Phase::Drive:
        default: {
          // The cube coasts v^2 / (2 mu g) past wherever the pad stops, so
          // the plow step shrinks with the remaining distance or the cube
          // skids through the goal and has to be fetched back.
          double adv = std::clamp(0.4 * dist, 0.004, 0.05);
          Vec3 plow = obj + 0.08 * dir;
          Vec3 dp = plow - tip;
          dp.z() = 0.0;
          if (dp.norm() > adv) dp *= adv / dp.norm();
          target = tip + dp;
          target.z() = top + 0.6 * scene_.cube_edge;
          // Margin covers centroid wobble while the cube tilts over the bump;
          // only a tip clearly past the cube has really lost the face.
          bool wrong_side =
              (tip.head<2>() - obj.head<2>()).dot(dir.head<2>()) > 0.03;
          if (wrong_side || (tip.head<2>() - obj.head<2>()).norm() > 0.12)
            phase_ = Phase::Approach;  // lost the face; climb and restage
          break;
        }
      }
    } else {
      // Card: settle the tip pad onto the card and drag it. The pad bottom
      // aims at mid-card thickness, deep enough to load the pad friction
      // but above the table so the tip never grinds on the surface itself.
      double press_z = top + sim::SimConfig{}.ee_radius - 0.004;
      // Near the card the pad lowers no faster than 5 mm per tick; a hard
      // slam squirts the 5 g card out from under it. Higher up it can drop
      // at 20 mm per tick.
      auto descend = [&](double z) {
        double rate = tip.z() < top + 0.06 ? 0.005 : 0.02;
        return std::max(z, tip.z() - rate);
      };
      switch (phase_) {
        case Phase::Approach:
          target = obj;
          target.z() = top + 0.08;
          if ((tip.head<2>() - obj.head<2>()).norm() < 0.012)
            phase_ = Phase::Engage;
          break;
        case Phase::Engage:
          target = obj;
          target.z() = descend(press_z);
          if (tip.z() < top + 0.025) phase_ = Phase::Drive;
          break;
        case Phase::Drive:
        default: {
          // The pad only drags while it slips over the card, so the target
          // stays ahead of the goal until the card itself arrives. When the
          // card lags off the pad, lift and re-center: a press-drag ratchet.
          Vec3 dir = push_dir(obj, goal);
          double dist = (goal.head<2>() - obj.head<2>()).norm();
          Vec3 ahead = obj + std::min(dist + 0.02, 0.05) * dir;
          // Creep toward it; a full-stride lateral lunge unloads the pad
          // and the card stays behind.
          Vec3 dxy = ahead - tip;
          dxy.z() = 0.0;
          if (dxy.norm() > 0.02) dxy *= 0.02 / dxy.norm();
          target = tip + dxy;
          target.z() = descend(press_z);
          if ((tip.head<2>() - obj.head<2>()).norm() > 0.04)
            phase_ = Phase::Approach;  // lost the card; lift and repossess
          break;
        }
      }
    }

    Action a;
    a.dq = ik_step(obs.q, tip, target);
    a.kp.setConstant(60.0);
    a.kd.setConstant(2.0);
    // A plain PD settles g/kp short of the setpoint, which at these gains
    // is a centimeter of tip droop. Bias the command by the same amount.
    Vec6 sag = act::gravity_torques(model_, obs.q, 0.0) / a.kp[0];
    for (int i = 0; i < kNumJoints; ++i)
      a.dq[i] = std::clamp(a.dq[i] + sag[i], -0.2, 0.2);
    return a;
  }

  std::unique_ptr<Policy> clone() const override {
    return std::make_unique<ScriptedPushPolicy>(*this);
  }

 private:
  enum class Phase { Approach, Engage, Drive };

  static Vec3 centroid(const Eigen::Matrix<double, 2, 8>& kp) {
    Vec3 c = Vec3::Zero();
    c.head<2>() = kp.rowwise().mean();
    return c;
  }

  static Vec3 push_dir(const Vec3& obj, const Vec3& goal) {
    Vec3 d = goal - obj;
    d.z() = 0.0;
    double n = d.norm();
    return n > 1e-9 ? Vec3(d / n) : Vec3(1, 0, 0);
  }

  Vec6 ik_step(const Vec6& q, const Vec3& tip, const Vec3& target) const {
    Vec3 dp = target - tip;
    double dist = dp.norm();
    const double max_step = 0.05;  // m per tick
    if (dist > max_step) dp *= max_step / dist;
    auto J = kin::point_jacobian(model_, q, kNumJoints - 1, tip);
    Mat6 A = (J.transpose() * J + 1e-3 * Mat6::Identity());
    Vec6 dq = A.ldlt().solve(J.transpose() * dp);
    for (int i = 0; i < kNumJoints; ++i) dq[i] = std::clamp(dq[i], -0.2, 0.2);
    return dq;
  }

  RobotModel model_;
  SceneModel scene_;
  Task task_;
  Phase phase_ = Phase::Approach;
};

}  // namespace

LinearPolicy::LinearPolicy(const ActionBounds& bounds, VecX params)
    : bounds_(bounds), params_(std::move(params)) {
  if (params_.size() != param_count())
    throw Error(ErrorKind::InvalidArgument,
                "linear policy needs " + std::to_string(param_count()) +
                    " parameters, got " + std::to_string(params_.size()));
}

Action LinearPolicy::act(const Observation& obs) {
  VecX x = obs.flatten();
  Eigen::Matrix<double, 18, 1> raw;
  for (int j = 0; j < kActionDim; ++j) {
    double v = params_[kActionDim * kObsDim + j];
    v += params_.segment(j * kObsDim, kObsDim).dot(x);
    raw[j] = v;
  }
  return bounds_.clamp(Action::from_flat(raw));
}

std::unique_ptr<Policy> LinearPolicy::clone() const {
  return std::make_unique<LinearPolicy>(*this);
}

std::unique_ptr<Policy> make_zero_policy() {
  return std::make_unique<ZeroPolicy>();
}

std::unique_ptr<Policy> make_random_policy(const ActionBounds& bounds) {
  return std::make_unique<RandomPolicy>(bounds);
}

std::unique_ptr<Policy> make_scripted_push_policy(const RobotModel& model,
                                                  const SceneModel& scene,
                                                  Task task) {
  return std::make_unique<ScriptedPushPolicy>(model, scene, task);
}

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const RobotModel& model,
                                    const SceneModel& scene, Task task,
                                    const ActionBounds& bounds,
                                    const VecX* linear_params) {
  if (name == "zero") return make_zero_policy();
  if (name == "random") return make_random_policy(bounds);
  if (name == "scripted") return make_scripted_push_policy(model, scene, task);
  if (name == "linear") {
    if (!linear_params)
      throw Error(ErrorKind::InvalidArgument,
                  "linear policy needs a parameter file");
    return std::make_unique<LinearPolicy>(bounds, *linear_params);
  }
  throw Error(ErrorKind::InvalidArgument,
              "unknown policy '" + name +
                  "' (valid: zero, random, scripted, linear)");
}

}  // namespace env
}  // namespace armada
