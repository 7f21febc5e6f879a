#include "armada.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "armada/actuation.hpp"
#include "armada/analysis.hpp"
#include "armada/calibration.hpp"
#include "armada/env.hpp"
#include "armada/kinematics.hpp"
#include "armada/model.hpp"
#include "armada/retarget.hpp"
#include "armada/runners.hpp"
#include "armada/types.hpp"

using namespace armada;

struct armada_model {
  RobotModel m;
};
struct armada_scene {
  SceneModel s;
};
struct armada_calibration {
  CalibrationTable t;
};

namespace {

thread_local std::string g_last_error;

armada_status status_of(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return ARMADA_ERR_INVALID_ARGUMENT;
    case ErrorKind::Parse:
      return ARMADA_ERR_PARSE;
    case ErrorKind::Invariant:
      return ARMADA_ERR_INVARIANT;
    case ErrorKind::Io:
      return ARMADA_ERR_IO;
    case ErrorKind::Numeric:
      return ARMADA_ERR_NUMERIC;
    case ErrorKind::State:
      return ARMADA_ERR_STATE;
  }
  return ARMADA_ERR_UNKNOWN;
}

template <typename Fn>
armada_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return ARMADA_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return ARMADA_ERR_UNKNOWN;
  } catch (...) {
    g_last_error = "unknown error";
    return ARMADA_ERR_UNKNOWN;
  }
}

void require(bool ok, const char* msg) {
  if (!ok) throw Error(ErrorKind::InvalidArgument, msg);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to " + path + " failed");
}

VecX load_param_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  std::vector<double> vals;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      size_t used = 0;
      double v = std::stod(line, &used);
      while (used < line.size() &&
             (line[used] == ' ' || line[used] == '\t' || line[used] == '\r'))
        ++used;
      if (used != line.size()) throw std::invalid_argument("trailing text");
      vals.push_back(v);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse, path + ":" + std::to_string(line_no) +
                                        ": expected one number per line");
    }
  }
  VecX out(static_cast<Eigen::Index>(vals.size()));
  for (size_t i = 0; i < vals.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = vals[i];
  return out;
}

void save_param_file(const std::string& path, const VecX& params) {
  std::ostringstream out;
  char buf[40];
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g\n", params[i]);
    out << buf;
  }
  write_file(path, out.str());
}

Vec6 to_vec6(const double q[6]) {
  Vec6 v;
  for (int i = 0; i < 6; ++i) v[i] = q[i];
  return v;
}

}  // namespace

extern "C" {

const char* armada_version(void) { return "0.1.0"; }

const char* armada_last_error(void) { return g_last_error.c_str(); }

/* --- models and scenes -------------------------------------------------- */

armada_status armada_model_default(armada_model** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new armada_model{default_armada_model()};
  });
}

armada_status armada_model_load(const char* path, armada_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out is null");
    auto holder = std::make_unique<armada_model>();
    holder->m = load_model(read_file(path));
    *out = holder.release();
  });
}

armada_status armada_model_save(const armada_model* m, const char* path) {
  return guarded([&] {
    require(m != nullptr && path != nullptr, "model/path is null");
    write_file(path, serialize_model(m->m));
  });
}

void armada_model_free(armada_model* m) { delete m; }

armada_status armada_model_translate_base(armada_model* m, double dx,
                                          double dy, double dz) {
  return guarded([&] {
    require(m != nullptr, "model is null");
    m->m.base_pose.p += Vec3(dx, dy, dz);
  });
}

armada_status armada_model_scale_velocity_limits(armada_model* m,
                                                 double scale) {
  return guarded([&] {
    require(m != nullptr, "model is null");
    require(scale > 0.0, "scale must be > 0");
    for (auto& joint : m->m.joints) joint.velocity_limit *= scale;
    m->m.validate();
  });
}

armada_status armada_scene_default(armada_scene** out) {
  return guarded([&] {
    require(out != nullptr, "out is null");
    *out = new armada_scene{default_scene()};
  });
}

armada_status armada_scene_load(const char* path, armada_scene** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out is null");
    auto holder = std::make_unique<armada_scene>();
    holder->s = load_scene(read_file(path));
    *out = holder.release();
  });
}

void armada_scene_free(armada_scene* s) { delete s; }

/* --- kinematics and actuation ------------------------------------------- */

armada_status armada_model_fk(const armada_model* m, const double q[6],
                              double out_pose[7]) {
  return guarded([&] {
    require(m != nullptr && q != nullptr && out_pose != nullptr,
            "null argument");
    const Pose ee = kin::ee_pose(m->m, to_vec6(q));
    Eigen::Quaterniond quat(ee.R);
    quat.normalize();
    if (quat.w() < 0.0) quat.coeffs() = -quat.coeffs();
    out_pose[0] = ee.p.x();
    out_pose[1] = ee.p.y();
    out_pose[2] = ee.p.z();
    out_pose[3] = quat.w();
    out_pose[4] = quat.x();
    out_pose[5] = quat.y();
    out_pose[6] = quat.z();
  });
}

armada_status armada_model_jacobian(const armada_model* m, const double q[6],
                                    double out_jac[36]) {
  return guarded([&] {
    require(m != nullptr && q != nullptr && out_jac != nullptr,
            "null argument");
    const Mat6 jac = kin::geometric_jacobian(m->m, to_vec6(q));
    for (int r = 0; r < 6; ++r)
      for (int c = 0; c < 6; ++c) out_jac[r * 6 + c] = jac(r, c);
  });
}

armada_status armada_model_gravity_torques(const armada_model* m,
                                           const double q[6], double payload,
                                           double out_tau[6]) {
  return guarded([&] {
    require(m != nullptr && q != nullptr && out_tau != nullptr,
            "null argument");
    const Vec6 tau = act::gravity_torques(m->m, to_vec6(q), payload);
    for (int i = 0; i < 6; ++i) out_tau[i] = tau[i];
  });
}

armada_status armada_model_current_ratios(const armada_model* m,
                                          const double q[6], double payload,
                                          double out_ratios[6]) {
  return guarded([&] {
    require(m != nullptr && q != nullptr && out_ratios != nullptr,
            "null argument");
    const Vec6 tau = act::gravity_torques(m->m, to_vec6(q), payload);
    const Vec6 ratios = act::current_ratios(m->m, tau);
    for (int i = 0; i < 6; ++i) out_ratios[i] = ratios[i];
  });
}

armada_status armada_calibration_load(const char* path,
                                      armada_calibration** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path/out is null");
    auto holder = std::make_unique<armada_calibration>();
    holder->t = parse_calibration_csv(read_file(path));
    *out = holder.release();
  });
}

armada_status armada_calibration_save(const armada_calibration* c,
                                      const char* path) {
  return guarded([&] {
    require(c != nullptr && path != nullptr, "calibration/path is null");
    write_file(path, serialize_calibration_csv(c->t));
  });
}

void armada_calibration_free(armada_calibration* c) { delete c; }

armada_status armada_torque_from_current(const armada_calibration* c,
                                         double current, double* out_torque) {
  return guarded([&] {
    require(c != nullptr && out_torque != nullptr, "null argument");
    *out_torque = torque_from_current(c->t, current);
  });
}

armada_status armada_current_from_torque(const armada_calibration* c,
                                         double torque, double* out_current) {
  return guarded([&] {
    require(c != nullptr && out_current != nullptr, "null argument");
    *out_current = current_from_torque(c->t, torque);
  });
}

/* --- analysis ------------------------------------------------------------ */

armada_status armada_repeatability_radius(double mu, double sigma,
                                          double* out_r) {
  return guarded([&] {
    require(out_r != nullptr, "out_r is null");
    *out_r = ana::r_from_mu_sigma(mu, sigma);
  });
}

armada_status armada_repeatability_run(const char* input_csv,
                                       const char* output_csv,
                                       double* out_avg_mu,
                                       double* out_avg_sigma,
                                       double* out_avg_r) {
  return guarded([&] {
    require(input_csv != nullptr, "input_csv is null");
    const auto report = ana::repeatability_report_from_csv(read_file(input_csv));
    if (output_csv != nullptr)
      write_file(output_csv, ana::serialize_repeatability_report(report));
    if (out_avg_mu != nullptr) *out_avg_mu = report.avg_mu;
    if (out_avg_sigma != nullptr) *out_avg_sigma = report.avg_sigma;
    if (out_avg_r != nullptr) *out_avg_r = report.avg_r;
  });
}

armada_status armada_ballistic_range(double v, double angle, double h0,
                                     double g, double* out_range,
                                     double* out_time) {
  return guarded([&] {
    const auto res = ana::ballistic_range(v, angle, h0, g);
    if (out_range != nullptr) *out_range = res.range;
    if (out_time != nullptr) *out_time = res.flight_time;
  });
}

armada_status armada_required_launch_speed(double range, double angle,
                                           double h0, double g,
                                           double* out_speed) {
  return guarded([&] {
    require(out_speed != nullptr, "out_speed is null");
    *out_speed = ana::required_launch_speed(range, angle, h0, g);
  });
}

armada_status armada_impact_force(double mass, double dv, double dt,
                                  double* out_force) {
  return guarded([&] {
    require(out_force != nullptr, "out_force is null");
    *out_force = ana::impact_force(mass, dv, dt);
  });
}

/* --- runners -------------------------------------------------------------- */

armada_status armada_speed_test(const armada_model* m, double dt,
                                double vel_scale, const char* csv_path,
                                double* out_max_speed, double* out_mean_speed,
                                double* out_t_at_max, long long* out_rows) {
  return guarded([&] {
    require(m != nullptr, "model is null");
    run::SpeedTestConfig cfg;
    if (dt > 0.0) cfg.dt = dt;
    cfg.vel_scale = vel_scale;
    const auto res = run::speed_test(m->m, cfg);
    if (csv_path != nullptr) write_file(csv_path, res.csv);
    if (out_max_speed != nullptr) *out_max_speed = res.metrics.max_speed;
    if (out_mean_speed != nullptr) *out_mean_speed = res.metrics.mean_speed;
    if (out_t_at_max != nullptr) *out_t_at_max = res.metrics.t_at_max;
    if (out_rows != nullptr) *out_rows = res.rows;
  });
}

armada_status armada_env_evaluate(const armada_model* m,
                                  const armada_scene* s, const char* task,
                                  int scenario, const char* policy,
                                  const char* params_path, int episodes,
                                  uint64_t seed, int threads, int dr,
                                  const char* csv_path,
                                  double* out_success_rate,
                                  double* out_mean_return) {
  return guarded([&] {
    require(m != nullptr && s != nullptr && task != nullptr &&
                policy != nullptr,
            "null argument");
    const env::Task t = env::task_from_name(task);
    env::EpisodeConfig cfg = env::default_episode_config(t);
    cfg.scenario = scenario;
    if (dr == 0) cfg.dr.enabled = false;
    if (dr == 1) cfg.dr.enabled = true;

    VecX params;
    const VecX* params_ptr = nullptr;
    if (params_path != nullptr) {
      params = load_param_file(params_path);
      params_ptr = &params;
    }
    auto pol = env::make_policy(policy, m->m, s->s, t, cfg.bounds, params_ptr);
    const auto summary =
        env::evaluate(m->m, s->s, cfg, *pol, episodes, threads, seed);
    if (csv_path != nullptr)
      write_file(csv_path, env::serialize_eval_csv(summary));
    if (out_success_rate != nullptr) *out_success_rate = summary.success_rate;
    if (out_mean_return != nullptr) *out_mean_return = summary.mean_return;
  });
}

armada_status armada_train_cem(const armada_model* m, const armada_scene* s,
                               const char* task, int iterations,
                               int population, double elite_frac,
                               int episodes_per_candidate, uint64_t seed,
                               int threads, const char* params_path,
                               const char* curve_path, double* out_init_return,
                               double* out_final_return) {
  return guarded([&] {
    require(m != nullptr && s != nullptr && task != nullptr, "null argument");
    const env::Task t = env::task_from_name(task);
    env::EpisodeConfig cfg = env::default_episode_config(t);
    env::CemConfig cem;
    cem.iterations = iterations;
    cem.population = population;
    cem.elite_frac = elite_frac;
    cem.episodes_per_candidate = episodes_per_candidate;
    cem.seed = seed;
    cem.threads = threads;
    const auto res = env::train_cem(m->m, s->s, cfg, cem);
    if (params_path != nullptr) save_param_file(params_path, res.params);
    if (curve_path != nullptr) {
      std::ostringstream out;
      out << "iteration,mean_return\n";
      char buf[64];
      for (size_t i = 0; i < res.curve.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%.10g\n", i, res.curve[i]);
        out << buf;
      }
      write_file(curve_path, out.str());
    }
    if (out_init_return != nullptr) *out_init_return = res.init_return;
    if (out_final_return != nullptr) *out_final_return = res.final_return;
  });
}

armada_status armada_retarget_run(const armada_model* left,
                                  const armada_model* right,
                                  const char* keypoints_jsonl,
                                  double human_arm_length,
                                  const char* left_csv, const char* right_csv,
                                  const char* error_csv,
                                  double* out_left_wrist_mm,
                                  double* out_right_wrist_mm) {
  return guarded([&] {
    require(left != nullptr && right != nullptr && keypoints_jsonl != nullptr,
            "null argument");
    const auto frames = rt::load_keypoints_jsonl(keypoints_jsonl);
    const double scale_l = rt::shoulder_scale(left->m, human_arm_length);
    const double scale_r = rt::shoulder_scale(right->m, human_arm_length);
    // one scale for both arms keeps the inter-hand vector similar
    const double scale = 0.5 * (scale_l + scale_r);

    std::vector<rt::KeypointFrame> lf, rf;
    lf.reserve(frames.size());
    rf.reserve(frames.size());
    for (const auto& f : frames) {
      lf.push_back(rt::map_human_to_robot(f.t, f.left_shoulder, f.left_elbow,
                                          f.left_wrist, scale, left->m));
      rf.push_back(rt::map_human_to_robot(f.t, f.right_shoulder,
                                          f.right_elbow, f.right_wrist, scale,
                                          right->m));
    }

    rt::RetargetConfig cfg;
    const Vec6 q0 = Vec6::Zero();
    const auto traj_l = rt::retarget_trajectory(left->m, lf, cfg, q0);
    const auto traj_r = rt::retarget_trajectory(right->m, rf, cfg, q0);

    auto joint_csv = [](const std::vector<rt::TrajectoryPoint>& traj) {
      std::ostringstream out;
      out << "t,q1,q2,q3,q4,q5,q6\n";
      char buf[64];
      for (const auto& p : traj) {
        std::snprintf(buf, sizeof(buf), "%.6f", p.t);
        out << buf;
        for (int j = 0; j < 6; ++j) {
          std::snprintf(buf, sizeof(buf), ",%.10g", p.q[j]);
          out << buf;
        }
        out << "\n";
      }
      return out.str();
    };
    if (left_csv != nullptr) write_file(left_csv, joint_csv(traj_l));
    if (right_csv != nullptr) write_file(right_csv, joint_csv(traj_r));

    if (error_csv != nullptr) {
      std::ostringstream out;
      out << "t,left_elbow_mm,left_wrist_mm,right_elbow_mm,right_wrist_mm\n";
      char buf[160];
      for (size_t i = 0; i < traj_l.size() && i < traj_r.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.4f,%.4f,%.4f,%.4f\n",
                      traj_l[i].t, 1e3 * traj_l[i].elbow_err,
                      1e3 * traj_l[i].wrist_err, 1e3 * traj_r[i].elbow_err,
                      1e3 * traj_r[i].wrist_err);
        out << buf;
      }
      write_file(error_csv, out.str());
    }

    auto worst_wrist = [](const std::vector<rt::TrajectoryPoint>& traj) {
      double worst = 0.0;
      for (const auto& p : traj) worst = std::max(worst, p.wrist_err);
      return 1e3 * worst;
    };
    if (out_left_wrist_mm != nullptr) *out_left_wrist_mm = worst_wrist(traj_l);
    if (out_right_wrist_mm != nullptr)
      *out_right_wrist_mm = worst_wrist(traj_r);
  });
}

armada_status armada_calibrate_run(const char* input_csv,
                                   const char* output_csv, int sweep_points,
                                   double* out_max_roundtrip_a) {
  return guarded([&] {
    require(input_csv != nullptr, "input_csv is null");
    require(sweep_points >= 2, "sweep_points must be >= 2");
    const CalibrationTable table = parse_calibration_csv(read_file(input_csv));

    const double i_max = table.samples.back().first;
    double worst = 0.0;
    std::ostringstream out;
    out << "current_a,torque_nm,current_back_a\n";
    char buf[120];
    for (int k = 0; k < sweep_points; ++k) {
      const double i = -i_max + 2.0 * i_max * k / (sweep_points - 1);
      const double tau = torque_from_current(table, i);
      const double back = current_from_torque(table, tau);
      worst = std::max(worst, std::abs(back - i));
      std::snprintf(buf, sizeof(buf), "%.10g,%.10g,%.10g\n", i, tau, back);
      out << buf;
    }
    if (output_csv != nullptr) write_file(output_csv, out.str());
    if (out_max_roundtrip_a != nullptr) *out_max_roundtrip_a = worst;
  });
}

}  // extern "C"
