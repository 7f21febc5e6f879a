#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "armada/model.hpp"
#include "armada/rng.hpp"
#include "armada/simcore.hpp"
#include "armada/types.hpp"

namespace armada {
namespace env {

inline constexpr int kActionDim = 18;
inline constexpr int kObsDim = 69;  // 6+6+16+16+7+18

struct Action {
  Vec6 dq = Vec6::Zero();  // rad, residual on the tick-start position
  Vec6 kp = Vec6::Zero();
  Vec6 kd = Vec6::Zero();

  Eigen::Matrix<double, 18, 1> flatten() const;
  static Action from_flat(const Eigen::Matrix<double, 18, 1>& a);
};

struct ActionBounds {
  double dq_max = 0.2;  // rad
  double kp_max = 60.0;
  double kd_max = 4.0;

  /// Returns the in-bounds action; sets *clamped when anything moved.
  Action clamp(const Action& a, bool* clamped = nullptr) const;
};

struct Observation {
  Vec6 q = Vec6::Zero();
  Vec6 qdot = Vec6::Zero();
  Eigen::Matrix<double, 2, 8> object_keypoints = Eigen::Matrix<double, 2, 8>::Zero();
  Eigen::Matrix<double, 2, 8> goal_keypoints = Eigen::Matrix<double, 2, 8>::Zero();
  Eigen::Matrix<double, 7, 1> ee_pose = Eigen::Matrix<double, 7, 1>::Zero();
  Eigen::Matrix<double, 18, 1> prev_action = Eigen::Matrix<double, 18, 1>::Zero();

  /// q, qdot, object kp (x row then y row), goal kp, ee pose (p, wxyz with
  /// w >= 0), prev action. Always 69 long.
  VecX flatten() const;
};

/// The 8 bounding-box corners of the object projected straight down onto the
/// table plane: row 0 x, row 1 y, corner i has sign bits (i&1 -> +x,
/// i&2 -> +y, i&4 -> +z) in the object frame.
Eigen::Matrix<double, 2, 8> project_keypoints(const Pose& pose,
                                              const Vec3& dims);

enum class Task { Bump, Card, CardLite };

Task task_from_name(const std::string& name);
std::string task_name(Task task);

struct RewardWeights {
  double kp_dist = 1.0;       // per meter of mean keypoint error
  double action_cost = 0.001; // per rad^2 of dq
  double success_bonus = 10.0;
  double fall_penalty = 5.0;
};

struct EpisodeConfig {
  Task task = Task::Bump;
  int scenario = 1;  // bump only: 1 pushes right half -> left half
  int max_steps = 100;
  double eps_pos = 0.025;  // m
  double eps_yaw = 0.2;    // rad; ignored for card-lite
  sim::DrConfig dr;
  sim::SimConfig sim;
  RewardWeights reward;
  ActionBounds bounds;
  std::uint64_t seed = 0;
};

/// Ready defaults per task; card-lite turns DR off and shrinks the episode.
EpisodeConfig default_episode_config(Task task);

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
  bool success = false;
  bool fell = false;
  bool truncated = false;
  bool action_clamped = false;
  double kp_err = 0.0;  // m, mean keypoint distance after the step
};

class Env {
 public:
  Env(RobotModel model, SceneModel scene, EpisodeConfig config);

  /// Fresh episode driven by config.seed.
  Observation reset();
  /// Fresh episode with an explicit seed (used by evaluate).
  Observation reset(std::uint64_t seed);

  /// One 20 Hz policy tick = exactly config.sim.substeps controller steps.
  /// Throws Error(State) when the episode is already done.
  StepResult step(const Action& action);

  bool done() const { return done_; }
  int ticks() const { return ticks_; }
  const sim::WorldState& world() const { return world_; }
  const EpisodeConfig& config() const { return config_; }
  const RobotModel& model() const { return model_; }
  Vec3 object_dims() const { return object_dims_; }
  double table_top() const;

  /// Test hooks: place the object or the goal directly (after reset).
  void set_object_pose(const Pose& pose);
  void set_goal_pose(const Pose& pose);
  Pose goal_pose() const { return goal_; }

 private:
  Observation observe() const;
  void place_object(Rng& rng);
  void sample_goal(Rng& rng);
  void sample_arm(Rng& rng);
  double mean_keypoint_error() const;
  bool at_goal() const;

  RobotModel model_;
  SceneModel scene_;
  EpisodeConfig config_;
  sim::WorldState world_;
  sim::DrSample dr_;
  sim::SimConfig sim_;
  Rng rng_{0};
  Pose goal_;
  Vec3 object_dims_ = Vec3::Zero();
  int object_index_ = -1;
  Eigen::Matrix<double, 18, 1> prev_action_ =
      Eigen::Matrix<double, 18, 1>::Zero();
  int ticks_ = 0;
  bool done_ = true;
  bool started_ = false;
};

// --- Policies ----------------------------------------------------------------

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Action act(const Observation& obs) = 0;
  /// Called once per episode before the first act(), with an
  /// episode-deterministic seed.
  virtual void reseed(std::uint64_t) {}
  virtual std::unique_ptr<Policy> clone() const = 0;
};

/// Holds position: dq = 0 with fixed moderate gains.
std::unique_ptr<Policy> make_zero_policy();
/// Uniform random actions within bounds each tick.
std::unique_ptr<Policy> make_random_policy(const ActionBounds& bounds);
/// Straight-line pusher. On card tasks it presses the gripper tip onto the
/// card and drags it to the goal; on the bump task it pushes the cube from
/// behind. Differential IK over the model turns tip targets into dq.
std::unique_ptr<Policy> make_scripted_push_policy(const RobotModel& model,
                                                  const SceneModel& scene,
                                                  Task task);

/// a = bounds-squashed (W obs + b); parameter vector is W row-major then b.
class LinearPolicy : public Policy {
 public:
  LinearPolicy(const ActionBounds& bounds, VecX params);
  static int param_count() { return kActionDim * (kObsDim + 1); }
  Action act(const Observation& obs) override;
  std::unique_ptr<Policy> clone() const override;
  const VecX& params() const { return params_; }

 private:
  ActionBounds bounds_;
  VecX params_;
};

std::unique_ptr<Policy> make_policy(const std::string& name,
                                    const RobotModel& model,
                                    const SceneModel& scene, Task task,
                                    const ActionBounds& bounds,
                                    const VecX* linear_params = nullptr);

// --- Rollouts ----------------------------------------------------------------

struct TickRecord {
  VecX obs;
  Eigen::Matrix<double, 18, 1> action;
  double reward = 0.0;
};

struct EpisodeTrace {
  std::uint64_t seed = 0;
  std::vector<TickRecord> ticks;
  double total_return = 0.0;
  bool success = false;
  bool fell = false;
  int steps = 0;
  double final_kp_err = 0.0;
};

EpisodeTrace rollout(Env& env, Policy& policy, std::uint64_t seed,
                     bool keep_ticks = false);

/// JSON-lines, one record per tick.
void write_trace_jsonl(std::ostream& out, const EpisodeTrace& trace);

struct EvalSummary {
  std::vector<EpisodeTrace> episodes;  // seeds base..base+n-1, ticks dropped
  double success_rate = 0.0;
  double mean_return = 0.0;
};

/// Seeds base_seed..base_seed+episodes-1, fanned out over `threads` workers
/// (0 = use ARMADA_SIM_THREADS or hardware concurrency). Results are keyed
/// by seed, so scheduling never changes the summary.
EvalSummary evaluate(const RobotModel& model, const SceneModel& scene,
                     const EpisodeConfig& config, const Policy& policy,
                     int episodes, int threads = 0,
                     std::uint64_t base_seed = 0);

/// CSV `seed,success,steps,final_kp_err`.
std::string serialize_eval_csv(const EvalSummary& summary);

// --- Trainer -----------------------------------------------------------------

struct CemConfig {
  int iterations = 15;
  int population = 48;
  double elite_frac = 0.167;
  int episodes_per_candidate = 4;
  // Exploration scale, relative to a built-in per-weight metric that equalizes
  // how much each observation channel can perturb each action row.
  double init_std = 1.0;
  double min_std = 0.1;  // annealing floor, same relative units
  std::uint64_t seed = 0;
  int threads = 0;
};

struct CemResult {
  VecX params;                // best elite mean after the last iteration
  std::vector<double> curve;  // population mean return per iteration
  double init_return = 0.0;   // curve.front()
  double final_return = 0.0;  // curve.back()
  bool degenerate = false;    // population < 2
};

/// Cross-entropy search over LinearPolicy parameters on a trivialized task.
/// Deterministic in (config, seed); candidates are evaluated on
/// per-iteration common seeds.
CemResult train_cem(const RobotModel& model, const SceneModel& scene,
                    const EpisodeConfig& episode, const CemConfig& cem);

}  // namespace env
}  // namespace armada
