#include "armada/env.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "armada/actuation.hpp"
#include "armada/kinematics.hpp"

namespace armada {
namespace env {

Eigen::Matrix<double, 18, 1> Action::flatten() const {
  Eigen::Matrix<double, 18, 1> a;
  a << dq, kp, kd;
  return a;
}

Action Action::from_flat(const Eigen::Matrix<double, 18, 1>& a) {
  Action out;
  out.dq = a.segment<6>(0);
  out.kp = a.segment<6>(6);
  out.kd = a.segment<6>(12);
  return out;
}

Action ActionBounds::clamp(const Action& a, bool* clamped) const {
  Action out;
  bool moved = false;
  for (int i = 0; i < kNumJoints; ++i) {
    out.dq[i] = std::clamp(a.dq[i], -dq_max, dq_max);
    out.kp[i] = std::clamp(a.kp[i], 0.0, kp_max);
    out.kd[i] = std::clamp(a.kd[i], 0.0, kd_max);
    moved |= out.dq[i] != a.dq[i] || out.kp[i] != a.kp[i] ||
             out.kd[i] != a.kd[i];
  }
  if (clamped) *clamped = moved;
  return out;
}

VecX Observation::flatten() const {
  VecX v(kObsDim);
  int at = 0;
  v.segment<6>(at) = q; at += 6;
  v.segment<6>(at) = qdot; at += 6;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 8; ++c) v[at++] = object_keypoints(r, c);
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 8; ++c) v[at++] = goal_keypoints(r, c);
  v.segment<7>(at) = ee_pose; at += 7;
  v.segment<18>(at) = prev_action;
  return v;
}

Eigen::Matrix<double, 2, 8> project_keypoints(const Pose& pose,
                                              const Vec3& dims) {
  if (!(dims.minCoeff() > 0.0))
    throw Error(ErrorKind::InvalidArgument, "keypoint dims must be positive");
  Eigen::Matrix<double, 2, 8> out;
  Vec3 h = 0.5 * dims;
  for (int i = 0; i < 8; ++i) {
    Vec3 corner((i & 1) ? h.x() : -h.x(), (i & 2) ? h.y() : -h.y(),
                (i & 4) ? h.z() : -h.z());
    Vec3 world = pose * corner;
    out(0, i) = world.x();
    out(1, i) = world.y();
  }
  return out;
}

Task task_from_name(const std::string& name) {
  if (name == "bump") return Task::Bump;
  if (name == "card") return Task::Card;
  if (name == "card-lite" || name == "card_lite") return Task::CardLite;
  throw Error(ErrorKind::InvalidArgument,
              "unknown task '" + name + "' (valid: bump, card, card-lite)");
}

std::string task_name(Task task) {
  switch (task) {
    case Task::Bump: return "bump";
    case Task::Card: return "card";
    case Task::CardLite: return "card-lite";
  }
  return "?";
}

EpisodeConfig default_episode_config(Task task) {
  EpisodeConfig c;
  c.task = task;
  switch (task) {
    case Task::Bump:
      c.dr.enabled = true;
      break;
    case Task::Card:
      c.dr.enabled = true;
      c.sim.micro_steps = 8;  // the 5 g card wants softer slices
      break;
    case Task::CardLite:
      c.dr.enabled = false;
      c.sim.micro_steps = 8;
      c.max_steps = 50;
      break;
  }
  return c;
}

// ---------------------------------------------------------------------------
// Env
// ---------------------------------------------------------------------------

namespace {

Mat3 box_inertia(double mass, const Vec3& dims) {
  Mat3 I = Mat3::Zero();
  I(0, 0) = mass / 12.0 * (dims.y() * dims.y() + dims.z() * dims.z());
  I(1, 1) = mass / 12.0 * (dims.x() * dims.x() + dims.z() * dims.z());
  I(2, 2) = mass / 12.0 * (dims.x() * dims.x() + dims.y() * dims.y());
  return I;
}

double yaw_of(const Mat3& R) { return std::atan2(R(1, 0), R(0, 0)); }

const Vec6 kReadyPosture = (Vec6() << 0.0, 0.8, 0.0, -1.3, 0.9, 0.0).finished();

}  // namespace

Env::Env(RobotModel model, SceneModel scene, EpisodeConfig config)
    : model_(std::move(model)),
      scene_(std::move(scene)),
      config_(std::move(config)) {
  model_.validate();
  scene_.validate();
  if (config_.scenario != 1 && config_.scenario != 2)
    throw Error(ErrorKind::InvalidArgument, "scenario must be 1 or 2");
  if (config_.max_steps < 1)
    throw Error(ErrorKind::InvalidArgument, "max_steps must be >= 1");
}

double Env::table_top() const {
  return scene_.table_height + dr_.table_dz;
}

Observation Env::reset() { return reset(config_.seed); }

Observation Env::reset(std::uint64_t seed) {
  rng_ = Rng(seed);
  Rng rng_dr = rng_.split(0);
  Rng rng_place = rng_.split(1);
  Rng rng_arm = rng_.split(2);
  Rng rng_goal = rng_.split(3);
  rng_ = rng_.split(4);  // torque noise stream for the episode

  world_ = sim::WorldState{};
  sim::RigidBodyState ground;
  ground.name = "ground";
  ground.dynamic = false;
  ground.pose = Pose::from_translation({0.0, 0.0, -0.05});
  ground.half_extents = Vec3(2.0, 2.0, 0.05);
  ground.friction = 0.8;
  world_.bodies.push_back(ground);

  sim::RigidBodyState table;
  table.name = "table";
  table.dynamic = false;
  table.pose = Pose::from_translation(
      {scene_.table_center_x, 0.0, scene_.table_height / 2.0});
  table.half_extents = Vec3(scene_.table_depth / 2.0, scene_.table_length / 2.0,
                            scene_.table_height / 2.0);
  table.friction = scene_.table_friction;
  world_.bodies.push_back(table);

  if (config_.task == Task::Bump) {
    sim::RigidBodyState bump;
    bump.name = "bump";
    bump.dynamic = false;
    bump.pose = Pose::from_translation(
        {scene_.table_center_x, 0.0,
         scene_.table_height + scene_.bump_height / 2.0});
    bump.half_extents =
        Vec3(scene_.table_depth / 2.0, scene_.bump_thickness / 2.0,
             scene_.bump_height / 2.0);
    bump.friction = scene_.table_friction;
    world_.bodies.push_back(bump);
  }

  sim::RigidBodyState obj;
  obj.name = "object";
  if (config_.task == Task::Bump) {
    object_dims_ = Vec3::Constant(scene_.cube_edge);
    obj.mass = scene_.cube_mass;
  } else {
    object_dims_ = scene_.card_dims;
    obj.mass = scene_.card_mass;
  }
  obj.half_extents = 0.5 * object_dims_;
  obj.inertia = box_inertia(obj.mass, object_dims_);
  obj.friction = scene_.object_friction;
  world_.bodies.push_back(obj);
  object_index_ = static_cast<int>(world_.bodies.size()) - 1;

  dr_ = sim::sample_dr(config_.dr, rng_dr);
  sim::apply_dr(world_, dr_, object_index_);

  sim_ = config_.sim;
  sim_.torque_noise_std = config_.dr.enabled ? dr_.torque_noise_std : 0.0;

  sample_arm(rng_arm);
  place_object(rng_place);
  sample_goal(rng_goal);

  prev_action_.setZero();
  ticks_ = 0;
  done_ = false;
  started_ = true;
  return observe();
}

void Env::sample_arm(Rng& rng) {
  const double top = table_top();
  for (int attempt = 0; attempt < 100; ++attempt) {
    Vec6 q;
    for (int i = 0; i < kNumJoints; ++i) {
      const JointSpec& js = model_.joints[static_cast<size_t>(i)];
      q[i] = std::clamp(kReadyPosture[i] + rng.uniform(-0.35, 0.35), js.lower,
                        js.upper);
    }
    q += dr_.joint_pos_noise;
    for (int i = 0; i < kNumJoints; ++i) {
      const JointSpec& js = model_.joints[static_cast<size_t>(i)];
      q[i] = std::clamp(q[i], js.lower, js.upper);
    }
    auto kp = kin::keypoints(model_, q);
    bool clear = true;
    for (const Vec3& p : {kp.elbow, kp.wrist, kp.ee}) {
      bool over_table =
          p.x() > scene_.table_center_x - scene_.table_depth / 2.0 - 0.05 &&
          p.x() < scene_.table_center_x + scene_.table_depth / 2.0 + 0.05 &&
          std::abs(p.y()) < scene_.table_length / 2.0 + 0.05;
      if (over_table && p.z() < top + 0.02) clear = false;
      if (p.z() < 0.05) clear = false;
    }
    if (!clear) continue;
    world_.arm.q = q;
    world_.arm.qdot = dr_.joint_vel_noise;
    return;
  }
  throw Error(ErrorKind::State,
              "no collision-free arm configuration found in 100 draws");
}

void Env::place_object(Rng& rng) {
  double x, y, yaw;
  if (config_.task == Task::Bump) {
    double side = config_.scenario == 1 ? -1.0 : 1.0;  // start half
    x = rng.uniform(scene_.table_center_x - 0.075,
                    scene_.table_center_x + 0.075);
    y = side * rng.uniform(0.11, 0.31);
    yaw = rng.uniform(0.0, 2.0 * M_PI);
  } else if (config_.task == Task::Card) {
    x = rng.uniform(scene_.table_center_x - scene_.table_depth / 2.0 + 0.05,
                    scene_.table_center_x + scene_.table_depth / 2.0 - 0.05);
    y = rng.uniform(-scene_.table_length / 2.0 + 0.05,
                    scene_.table_length / 2.0 - 0.05);
    yaw = rng.uniform(0.0, 2.0 * M_PI);
  } else {
    x = rng.uniform(scene_.table_center_x - 0.07,
                    scene_.table_center_x + 0.01);
    y = rng.uniform(-0.06, 0.06);
    yaw = rng.uniform(-0.3, 0.3);
  }
  sim::RigidBodyState& obj = world_.bodies[static_cast<size_t>(object_index_)];
  obj.pose.R = rotation_exp(Vec3(0, 0, yaw));
  obj.pose.p = Vec3(x, y, table_top() + obj.half_extents.z());
  obj.v.setZero();
  obj.w.setZero();
}

void Env::sample_goal(Rng& rng) {
  const sim::RigidBodyState& obj =
      world_.bodies[static_cast<size_t>(object_index_)];
  double x, y, yaw;
  if (config_.task == Task::Bump) {
    double side = config_.scenario == 1 ? 1.0 : -1.0;  // opposite half
    x = rng.uniform(scene_.table_center_x - 0.075,
                    scene_.table_center_x + 0.075);
    y = side * rng.uniform(0.11, 0.31);
    yaw = rng.uniform(0.0, 2.0 * M_PI);
  } else if (config_.task == Task::Card) {
    for (int attempt = 0;; ++attempt) {
      x = rng.uniform(scene_.table_center_x - scene_.table_depth / 2.0 + 0.05,
                      scene_.table_center_x + scene_.table_depth / 2.0 - 0.05);
      y = rng.uniform(-scene_.table_length / 2.0 + 0.05,
                      scene_.table_length / 2.0 - 0.05);
      double d = std::hypot(x - obj.pose.p.x(), y - obj.pose.p.y());
      if (d > 0.1 || attempt >= 100) break;
    }
    yaw = rng.uniform(0.0, 2.0 * M_PI);
  } else {
    double phi = rng.uniform(0.0, 2.0 * M_PI);
    x = obj.pose.p.x() + 0.05 * std::cos(phi);
    y = obj.pose.p.y() + 0.05 * std::sin(phi);
    yaw = yaw_of(obj.pose.R);
  }
  goal_.R = rotation_exp(Vec3(0, 0, yaw));
  goal_.p = Vec3(x, y, obj.pose.p.z());
}

void Env::set_object_pose(const Pose& pose) {
  if (!started_) throw Error(ErrorKind::State, "reset the episode first");
  sim::RigidBodyState& obj = world_.bodies[static_cast<size_t>(object_index_)];
  obj.pose = pose;
  obj.v.setZero();
  obj.w.setZero();
}

void Env::set_goal_pose(const Pose& pose) {
  if (!started_) throw Error(ErrorKind::State, "reset the episode first");
  goal_ = pose;
}

double Env::mean_keypoint_error() const {
  const sim::RigidBodyState& obj =
      world_.bodies[static_cast<size_t>(object_index_)];
  auto okp = project_keypoints(obj.pose, object_dims_);
  auto gkp = project_keypoints(goal_, object_dims_);
  double sum = 0.0;
  for (int i = 0; i < 8; ++i) sum += (okp.col(i) - gkp.col(i)).norm();
  return sum / 8.0;
}

bool Env::at_goal() const {
  const sim::RigidBodyState& obj =
      world_.bodies[static_cast<size_t>(object_index_)];
  double pos_err = (obj.pose.p.head<2>() - goal_.p.head<2>()).norm();
  if (pos_err >= config_.eps_pos) return false;
  if (config_.task == Task::CardLite) return true;
  double dyaw = wrap_angle(yaw_of(obj.pose.R) - yaw_of(goal_.R));
  return std::abs(dyaw) < config_.eps_yaw;
}

Observation Env::observe() const {
  Observation obs;
  obs.q = world_.arm.q;
  obs.qdot = world_.arm.qdot;
  const sim::RigidBodyState& obj =
      world_.bodies[static_cast<size_t>(object_index_)];
  obs.object_keypoints = project_keypoints(obj.pose, object_dims_);
  obs.goal_keypoints = project_keypoints(goal_, object_dims_);
  auto fk = kin::forward_kinematics(model_, world_.arm.q);
  Vec3 p = fk.ee.p + dr_.ee_obs_offset;
  Eigen::Quaterniond quat(fk.ee.R);
  quat.normalize();
  if (quat.w() < 0) quat.coeffs() *= -1.0;
  obs.ee_pose << p.x(), p.y(), p.z(), quat.w(), quat.x(), quat.y(), quat.z();
  obs.prev_action = prev_action_;
  return obs;
}

StepResult Env::step(const Action& action) {
  if (!started_) throw Error(ErrorKind::State, "reset the episode first");
  if (done_) throw Error(ErrorKind::State, "step called on a done episode");

  StepResult result;
  Action a = config_.bounds.clamp(action, &result.action_clamped);
  Vec6 q_des = world_.arm.q + a.dq;
  act::PdGains gains;
  gains.kp = a.kp;
  gains.kd = a.kd;

  for (int s = 0; s < sim_.substeps; ++s) {
    Vec6 tau =
        act::pd_torque(model_, gains, q_des, world_.arm.q, world_.arm.qdot);
    sim::step(world_, model_, tau, sim_, &rng_);
  }
  ++ticks_;

  result.kp_err = mean_keypoint_error();
  const sim::RigidBodyState& obj =
      world_.bodies[static_cast<size_t>(object_index_)];
  result.success = at_goal();
  result.fell = obj.pose.p.z() < table_top() - 0.1;
  result.truncated =
      !result.success && !result.fell && ticks_ >= config_.max_steps;
  result.reward = -config_.reward.kp_dist * result.kp_err -
                  config_.reward.action_cost * a.dq.squaredNorm() +
                  (result.success ? config_.reward.success_bonus : 0.0) -
                  (result.fell ? config_.reward.fall_penalty : 0.0);
  result.done = result.success || result.fell || result.truncated;
  done_ = result.done;

  prev_action_ = a.flatten();
  result.obs = observe();
  return result;
}

// ---------------------------------------------------------------------------
// Rollouts
// ---------------------------------------------------------------------------

EpisodeTrace rollout(Env& env, Policy& policy, std::uint64_t seed,
                     bool keep_ticks) {
  EpisodeTrace trace;
  trace.seed = seed;
  Observation obs = env.reset(seed);
  policy.reseed(Rng(seed).split(9).next_u64());
  try {
    while (!env.done()) {
      Action action = policy.act(obs);
      StepResult r = env.step(action);
      trace.total_return += r.reward;
      trace.success = r.success;
      trace.fell = r.fell;
      trace.final_kp_err = r.kp_err;
      if (keep_ticks) {
        TickRecord rec;
        rec.obs = obs.flatten();
        rec.action = action.flatten();
        rec.reward = r.reward;
        trace.ticks.push_back(rec);
      }
      obs = r.obs;
    }
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::Numeric) throw;
    trace.success = false;  // blown-up episode counts as a failure
  }
  trace.steps = env.ticks();
  return trace;
}

void write_trace_jsonl(std::ostream& out, const EpisodeTrace& trace) {
  for (size_t i = 0; i < trace.ticks.size(); ++i) {
    const TickRecord& rec = trace.ticks[i];
    nlohmann::json j;
    j["tick"] = i;
    j["obs"] = std::vector<double>(rec.obs.data(),
                                   rec.obs.data() + rec.obs.size());
    j["action"] = std::vector<double>(rec.action.data(),
                                      rec.action.data() + rec.action.size());
    j["reward"] = rec.reward;
    out << j.dump() << '\n';
  }
}

namespace {

int resolve_threads(int requested, int jobs) {
  int n = requested;
  if (n <= 0) {
    if (const char* envv = std::getenv("ARMADA_SIM_THREADS"))
      n = std::atoi(envv);
    if (n <= 0) n = static_cast<int>(std::thread::hardware_concurrency());
    if (n <= 0) n = 1;
  }
  return std::max(1, std::min(n, jobs));
}

}  // namespace

EvalSummary evaluate(const RobotModel& model, const SceneModel& scene,
                     const EpisodeConfig& config, const Policy& policy,
                     int episodes, int threads, std::uint64_t base_seed) {
  if (episodes < 1)
    throw Error(ErrorKind::InvalidArgument, "episodes must be >= 1");
  EvalSummary summary;
  summary.episodes.resize(static_cast<size_t>(episodes));
  int workers = resolve_threads(threads, episodes);

  auto work = [&](int worker) {
    Env env(model, scene, config);
    auto pol = policy.clone();
    for (int i = worker; i < episodes; i += workers)
      summary.episodes[static_cast<size_t>(i)] =
          rollout(env, *pol, base_seed + static_cast<std::uint64_t>(i));
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }

  for (const auto& ep : summary.episodes) {
    summary.success_rate += ep.success ? 1.0 : 0.0;
    summary.mean_return += ep.total_return;
  }
  summary.success_rate /= episodes;
  summary.mean_return /= episodes;
  return summary;
}

std::string serialize_eval_csv(const EvalSummary& summary) {
  std::ostringstream out;
  out << "seed,success,steps,final_kp_err\n";
  char buf[96];
  for (const auto& ep : summary.episodes) {
    std::snprintf(buf, sizeof(buf), "%llu,%d,%d,%.6f\n",
                  static_cast<unsigned long long>(ep.seed), ep.success ? 1 : 0,
                  ep.steps, ep.final_kp_err);
    out << buf;
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// CEM trainer
// ---------------------------------------------------------------------------

CemResult train_cem(const RobotModel& model, const SceneModel& scene,
                    const EpisodeConfig& episode, const CemConfig& cem) {
  if (cem.iterations < 1 || cem.population < 1)
    throw Error(ErrorKind::InvalidArgument,
                "cem needs iterations >= 1 and population >= 1");
  const int dim = LinearPolicy::param_count();
  const int pop = cem.population;
  const int elites = std::max(1, static_cast<int>(std::lround(
                                     cem.elite_frac * pop)));

  // Start around the hold policy: zero residual, moderate gains.
  VecX mean = VecX::Zero(dim);
  const int bias_at = kActionDim * kObsDim;
  for (int j = 6; j < 12; ++j) mean[bias_at + j] = 45.0;   // kp rows
  for (int j = 12; j < 18; ++j) mean[bias_at + j] = 1.5;   // kd rows

  // A zero-mean population almost never covers the quarter metre from the
  // ready posture down to the object inside one episode, so early returns are
  // pure control-cost noise and selection has nothing to climb. Seed the mean
  // with a posture attractor instead: solve IK for a hover point over the
  // spawn area and encode dq = alpha (q* - q) through the q columns and the
  // rate bias. That homes the tip from any reset posture and parks it at the
  // hover, so iteration 0 already brushes the object and refit can work on
  // where to push rather than whether to arrive.
  {
    Vec3 hover(scene.table_center_x - 0.03, 0.0, scene.table_height + 0.01);
    Vec6 q = kReadyPosture;
    for (int it = 0; it < 200; ++it) {
      Vec3 tip = kin::keypoints(model, q).ee;
      Vec3 dp = hover - tip;
      if (dp.norm() < 1e-4) break;
      if (dp.norm() > 0.05) dp *= 0.05 / dp.norm();
      Eigen::Matrix<double, 3, 6> J =
          kin::point_jacobian(model, q, kNumJoints - 1, tip);
      Eigen::Matrix3d JJt = J * J.transpose() + 1e-3 * Eigen::Matrix3d::Identity();
      q += J.transpose() * JJt.ldlt().solve(dp);
    }
    const double alpha = 0.15;
    for (int j = 0; j < 6; ++j) {
      mean[j * kObsDim + j] = -alpha;
      mean[bias_at + j] = alpha * q[j];
    }
  }

  // Search metric: raw observation channels span 0.05 m keypoint offsets to
  // gain echoes near 60, so a flat weight stddev buries the useful signal
  // under saturated dq chatter. Scale each weight so one typical-magnitude
  // channel perturbs its action row by a comparable fraction of the bound.
  VecX obs_scale(kObsDim);
  obs_scale.segment(0, 6).setConstant(1.5);    // q rad
  obs_scale.segment(6, 6).setConstant(2.0);    // qdot rad/s
  obs_scale.segment(12, 32).setConstant(0.5);  // object + goal keypoints m
  obs_scale.segment(44, 7).setConstant(0.7);   // ee pose
  obs_scale.segment(51, 6).setConstant(0.2);   // prev dq
  obs_scale.segment(57, 6).setConstant(60.0);  // prev kp
  obs_scale.segment(63, 6).setConstant(4.0);   // prev kd
  VecX act_scale(kActionDim);
  // Useful rate corrections sit well inside the bound; exploring at the full
  // 0.2 drowns the attractor in flailing. Bias noise also shifts the parked
  // posture by roughly std/alpha, which is most of the exploration that
  // matters here.
  act_scale.segment(0, 6).setConstant(0.05);   // dq rows
  act_scale.segment(6, 6).setConstant(10.0);   // kp rows
  act_scale.segment(12, 6).setConstant(0.5);   // kd rows
  // A reactive pusher only needs the card, the goal and its own tip; spending
  // variance on joint echoes and gain history buries that signal, so those
  // weights stay frozen at zero and only the biases move the gain rows.
  VecX col_on = VecX::Zero(kObsDim);
  col_on.segment(12, 32).setOnes();  // object + goal keypoints
  col_on.segment(44, 3).setOnes();   // ee position
  VecX base_std(dim);
  const double row_norm = std::sqrt(col_on.sum());
  for (int i = 0; i < kActionDim; ++i)
    for (int j = 0; j < kObsDim; ++j)
      base_std[i * kObsDim + j] =
          i < 6 ? col_on[j] * act_scale[i] / (obs_scale[j] * row_norm) : 0.0;
  for (int i = 0; i < kActionDim; ++i) base_std[bias_at + i] = act_scale[i];

  VecX stddev = cem.init_std * base_std;
  VecX floor_std = cem.min_std * base_std;

  CemResult result;
  result.degenerate = pop < 2;
  Rng master(cem.seed);
  ActionBounds bounds = episode.bounds;
  int workers = resolve_threads(cem.threads, pop);

  // One fixed episode set for the whole run: every candidate in every
  // iteration sees the same episodes, so the curve tracks the policy and not
  // the luck of the draw.
  std::vector<std::uint64_t> ep_seeds(
      static_cast<size_t>(cem.episodes_per_candidate));
  Rng seeder = master.split(1000);
  for (auto& s : ep_seeds) s = seeder.next_u64();

  std::vector<VecX> candidates(static_cast<size_t>(pop));
  std::vector<double> returns(static_cast<size_t>(pop));
  for (int iter = 0; iter < cem.iterations; ++iter) {
    Rng draw = master.split(static_cast<std::uint64_t>(iter));
    for (int i = 0; i < pop; ++i) {
      VecX theta(dim);
      for (int d = 0; d < dim; ++d)
        theta[d] = mean[d] + stddev[d] * draw.normal();
      candidates[static_cast<size_t>(i)] = std::move(theta);
    }

    auto work = [&](int worker) {
      Env env(model, scene, episode);
      for (int i = worker; i < pop; i += workers) {
        LinearPolicy pol(bounds, candidates[static_cast<size_t>(i)]);
        double total = 0.0;
        for (std::uint64_t s : ep_seeds)
          total += rollout(env, pol, s).total_return;
        returns[static_cast<size_t>(i)] =
            total / static_cast<double>(ep_seeds.size());
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }

    double pop_mean = 0.0;
    for (double r : returns) pop_mean += r;
    pop_mean /= pop;
    result.curve.push_back(pop_mean);

    std::vector<int> order(static_cast<size_t>(pop));
    for (int i = 0; i < pop; ++i) order[static_cast<size_t>(i)] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return returns[static_cast<size_t>(a)] > returns[static_cast<size_t>(b)];
    });

    VecX new_mean = VecX::Zero(dim);
    for (int e = 0; e < elites; ++e)
      new_mean += candidates[static_cast<size_t>(order[static_cast<size_t>(e)])];
    new_mean /= elites;
    VecX var = VecX::Zero(dim);
    for (int e = 0; e < elites; ++e) {
      const VecX& th =
          candidates[static_cast<size_t>(order[static_cast<size_t>(e)])];
      var += (th - new_mean).cwiseAbs2();
    }
    var /= elites;
    mean = new_mean;
    stddev = var.cwiseSqrt().cwiseMax(floor_std);
  }

  result.params = mean;
  result.init_return = result.curve.front();
  result.final_return = result.curve.back();
  return result;
}

}  // namespace env
}  // namespace armada
