// Command-line front end. Talks to the library strictly through the C API.

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "armada.h"

namespace {

const char* kind_name(int status) {
  switch (status) {
    case ARMADA_ERR_INVALID_ARGUMENT:
      return "invalid_argument";
    case ARMADA_ERR_PARSE:
      return "parse";
    case ARMADA_ERR_INVARIANT:
      return "invariant";
    case ARMADA_ERR_IO:
      return "io";
    case ARMADA_ERR_NUMERIC:
      return "numeric";
    case ARMADA_ERR_STATE:
      return "state";
    default:
      return "unknown";
  }
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 8);
  for (char c : s) {
    switch (c) {
      case '"':
        out += "\\\"";
        break;
      case '\\':
        out += "\\\\";
        break;
      case '\n':
        out += "\\n";
        break;
      case '\r':
        out += "\\r";
        break;
      case '\t':
        out += "\\t";
        break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

[[noreturn]] void fail(const char* kind, const std::string& message) {
  std::fprintf(stderr, "{\"error\":{\"kind\":\"%s\",\"message\":\"%s\"}}\n",
               kind, json_escape(message).c_str());
  std::exit(1);
}

void check(armada_status st) {
  if (st != ARMADA_OK) fail(kind_name(st), armada_last_error());
}

struct ModelGuard {
  armada_model* m = nullptr;
  ~ModelGuard() { armada_model_free(m); }
};
struct SceneGuard {
  armada_scene* s = nullptr;
  ~SceneGuard() { armada_scene_free(s); }
};

void load_model_or_default(const std::string& path, ModelGuard& g) {
  if (path.empty())
    check(armada_model_default(&g.m));
  else
    check(armada_model_load(path.c_str(), &g.m));
}

void load_scene_or_default(const std::string& path, SceneGuard& g) {
  if (path.empty())
    check(armada_scene_default(&g.s));
  else
    check(armada_scene_load(path.c_str(), &g.s));
}

const char* opt_path(const std::string& s) {
  return s.empty() ? nullptr : s.c_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"armada: arm simulation, control and analysis toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(armada_version()));

  // --- speedtest -----------------------------------------------------------
  auto* sp = app.add_subcommand(
      "speedtest", "PD-tracked flexed-to-extended sweep; end-effector speed");
  std::string sp_model, sp_out;
  double sp_dt = 5e-4, sp_vel_scale = 1.0;
  sp->add_option("--model", sp_model, "robot model file (default: built-in)");
  sp->add_option("--dt", sp_dt, "integration and dump step (s)")
      ->check(CLI::PositiveNumber);
  sp->add_option("--vel-scale", sp_vel_scale,
                 "joint velocity limit multiplier (unitless)")
      ->check(CLI::PositiveNumber);
  sp->add_option("--out", sp_out, "trajectory CSV output path")->required();

  // --- repeatability ---------------------------------------------------------
  auto* rp = app.add_subcommand(
      "repeatability", "per-target repeatability report from measured points");
  std::string rp_in, rp_out;
  rp->add_option("--input", rp_in,
                 "measurement CSV: target_id,x_mm,y_mm,z_mm (mm)")
      ->required();
  rp->add_option("--out", rp_out, "report CSV output path");

  // --- env ------------------------------------------------------------------
  auto* ev = app.add_subcommand("env",
                                "roll policy episodes and summarize success");
  std::string ev_task, ev_policy = "scripted", ev_params, ev_model, ev_scene,
              ev_out, ev_dr = "default";
  int ev_episodes = 20, ev_scenario = 1, ev_threads = 0;
  std::uint64_t ev_seed = 0;
  ev->add_option("--task", ev_task, "task: bump, card, card-lite")->required();
  ev->add_option("--policy", ev_policy,
                 "policy: zero, random, scripted, linear");
  ev->add_option("--params", ev_params,
                 "linear policy parameter file (one number per line)");
  ev->add_option("--episodes", ev_episodes, "episode count")
      ->check(CLI::PositiveNumber);
  ev->add_option("--seed", ev_seed, "base RNG seed (episode i uses seed+i)")
      ->required();
  ev->add_option("--scenario", ev_scenario,
                 "bump start/goal layout, 1 or 2");
  ev->add_option("--threads", ev_threads,
                 "worker threads (0 = ARMADA_SIM_THREADS or all cores)");
  ev->add_option("--dr", ev_dr,
                 "domain randomization: on, off, default (per task)")
      ->check(CLI::IsMember({"on", "off", "default"}));
  ev->add_option("--model", ev_model, "robot model file (default: built-in)");
  ev->add_option("--scene", ev_scene, "scene file (default: built-in)");
  ev->add_option("--out", ev_out,
                 "summary CSV output path (seed,success,steps,final_kp_err)");

  // --- train ------------------------------------------------------------------
  auto* tr = app.add_subcommand("train",
                                "cross-entropy search over a linear policy");
  std::string tr_task = "card-lite", tr_model, tr_scene, tr_params, tr_curve;
  int tr_iters = 15, tr_pop = 48, tr_eppc = 4, tr_threads = 0;
  double tr_elite = 0.167;
  std::uint64_t tr_seed = 0;
  tr->add_option("--task", tr_task, "task: bump, card, card-lite");
  tr->add_option("--iterations", tr_iters, "CEM iterations")
      ->check(CLI::PositiveNumber);
  tr->add_option("--population", tr_pop, "candidates per iteration")
      ->check(CLI::PositiveNumber);
  tr->add_option("--elite-frac", tr_elite,
                 "elite fraction of the population (unitless, 0-1)");
  tr->add_option("--episodes-per", tr_eppc, "episodes per candidate")
      ->check(CLI::PositiveNumber);
  tr->add_option("--seed", tr_seed, "RNG seed")->required();
  tr->add_option("--threads", tr_threads,
                 "worker threads (0 = ARMADA_SIM_THREADS or all cores)");
  tr->add_option("--model", tr_model, "robot model file (default: built-in)");
  tr->add_option("--scene", tr_scene, "scene file (default: built-in)");
  tr->add_option("--out-params", tr_params, "trained parameter output path");
  tr->add_option("--out-curve", tr_curve,
                 "training curve CSV output path (iteration,mean_return)");

  // --- retarget ----------------------------------------------------------------
  auto* rt = app.add_subcommand(
      "retarget", "map human keypoints onto the two arms, track with DLS IK");
  std::string rt_kp, rt_model_left, rt_model_right, rt_out_left, rt_out_right,
      rt_out_err;
  double rt_arm_len = 0.60;
  rt->add_option("--keypoints", rt_kp, "human keypoint JSONL file")
      ->required();
  rt->add_option("--human-arm-length", rt_arm_len,
                 "human shoulder-to-wrist length (m)")
      ->check(CLI::PositiveNumber);
  rt->add_option("--model-left", rt_model_left,
                 "left arm model file (default: built-in, base shifted +y)");
  rt->add_option("--model-right", rt_model_right,
                 "right arm model file (default: built-in, base shifted -y)");
  rt->add_option("--out-left", rt_out_left, "left joint CSV (t,q1..q6)");
  rt->add_option("--out-right", rt_out_right, "right joint CSV (t,q1..q6)");
  rt->add_option("--out-errors", rt_out_err, "tracking error CSV (mm)");

  // --- ballistics ----------------------------------------------------------------
  auto* bl = app.add_subcommand("ballistics",
                                "drag-free flight range or required speed");
  double bl_v = 0.0, bl_range = 0.0, bl_angle = 0.0, bl_h0 = 0.0, bl_g = 9.81;
  std::string bl_out;
  auto* bl_v_opt =
      bl->add_option("--v", bl_v, "launch speed (m/s); computes range");
  auto* bl_range_opt = bl->add_option(
      "--range", bl_range, "target range (m); computes required speed");
  bl->add_option("--angle", bl_angle, "launch angle above horizontal (rad)")
      ->required();
  bl->add_option("--h0", bl_h0, "release height above the floor (m)")
      ->required();
  bl->add_option("--g", bl_g, "gravity (m/s^2)");
  bl->add_option("--out", bl_out, "result CSV output path");
  bl_v_opt->excludes(bl_range_opt);
  bl_range_opt->excludes(bl_v_opt);

  // --- calibrate ----------------------------------------------------------------
  auto* cb = app.add_subcommand(
      "calibrate", "fit the current-torque table and check its inverse");
  std::string cb_in, cb_out;
  int cb_sweep = 101;
  cb->add_option("--samples", cb_in,
                 "calibration sample CSV: current_a,torque_nm")
      ->required();
  cb->add_option("--out", cb_out,
                 "sweep CSV output path (current_a,torque_nm,current_back_a)");
  cb->add_option("--sweep", cb_sweep, "sweep point count")
      ->check(CLI::Range(2, 1000000));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    fail("usage", e.what());
  }

  if (sp->parsed()) {
    ModelGuard model;
    load_model_or_default(sp_model, model);
    double max_speed = 0.0, mean_speed = 0.0, t_at_max = 0.0;
    long long rows = 0;
    check(armada_speed_test(model.m, sp_dt, sp_vel_scale, sp_out.c_str(),
                            &max_speed, &mean_speed, &t_at_max, &rows));
    std::printf(
        "max_speed_mps=%.6f mean_speed_mps=%.6f t_at_max_s=%.6f rows=%lld\n",
        max_speed, mean_speed, t_at_max, rows);
    return 0;
  }

  if (rp->parsed()) {
    double mu = 0.0, sigma = 0.0, r = 0.0;
    check(armada_repeatability_run(rp_in.c_str(), opt_path(rp_out), &mu,
                                   &sigma, &r));
    std::printf("avg_mu_mm=%.3f avg_sigma_mm=%.3f avg_r_mm=%.3f\n", mu, sigma,
                r);
    return 0;
  }

  if (ev->parsed()) {
    ModelGuard model;
    SceneGuard scene;
    load_model_or_default(ev_model, model);
    load_scene_or_default(ev_scene, scene);
    const int dr = ev_dr == "on" ? 1 : ev_dr == "off" ? 0 : -1;
    double success = 0.0, mean_return = 0.0;
    check(armada_env_evaluate(model.m, scene.s, ev_task.c_str(), ev_scenario,
                              ev_policy.c_str(), opt_path(ev_params),
                              ev_episodes, ev_seed, ev_threads, dr,
                              opt_path(ev_out), &success, &mean_return));
    std::printf("success_rate=%.4f mean_return=%.6f episodes=%d\n", success,
                mean_return, ev_episodes);
    return 0;
  }

  if (tr->parsed()) {
    ModelGuard model;
    SceneGuard scene;
    load_model_or_default(tr_model, model);
    load_scene_or_default(tr_scene, scene);
    double init_ret = 0.0, final_ret = 0.0;
    check(armada_train_cem(model.m, scene.s, tr_task.c_str(), tr_iters,
                           tr_pop, tr_elite, tr_eppc, tr_seed, tr_threads,
                           opt_path(tr_params), opt_path(tr_curve), &init_ret,
                           &final_ret));
    std::printf("init_return=%.6f final_return=%.6f\n", init_ret, final_ret);
    return 0;
  }

  if (rt->parsed()) {
    ModelGuard left, right;
    load_model_or_default(rt_model_left, left);
    load_model_or_default(rt_model_right, right);
    if (rt_model_left.empty())
      check(armada_model_translate_base(left.m, 0.0, 0.18, 0.0));
    if (rt_model_right.empty())
      check(armada_model_translate_base(right.m, 0.0, -0.18, 0.0));
    double left_mm = 0.0, right_mm = 0.0;
    check(armada_retarget_run(left.m, right.m, rt_kp.c_str(), rt_arm_len,
                              opt_path(rt_out_left), opt_path(rt_out_right),
                              opt_path(rt_out_err), &left_mm, &right_mm));
    std::printf("max_wrist_err_left_mm=%.4f max_wrist_err_right_mm=%.4f\n",
                left_mm, right_mm);
    return 0;
  }

  if (bl->parsed()) {
    if (bl_v_opt->count() == 0 && bl_range_opt->count() == 0)
      fail("usage", "ballistics needs --v or --range");
    double range = 0.0, time = 0.0, speed = 0.0;
    if (bl_v_opt->count() > 0) {
      speed = bl_v;
      check(armada_ballistic_range(bl_v, bl_angle, bl_h0, bl_g, &range,
                                   &time));
      std::printf("range_m=%.6f flight_time_s=%.6f\n", range, time);
    } else {
      check(armada_required_launch_speed(bl_range, bl_angle, bl_h0, bl_g,
                                         &speed));
      check(armada_ballistic_range(speed, bl_angle, bl_h0, bl_g, &range,
                                   &time));
      std::printf("required_speed_mps=%.6f flight_time_s=%.6f\n", speed,
                  time);
    }
    if (!bl_out.empty()) {
      FILE* f = std::fopen(bl_out.c_str(), "wb");
      if (f == nullptr) fail("io", "cannot open " + bl_out + " for writing");
      std::fprintf(f, "v_mps,angle_rad,h0_m,g_mps2,range_m,flight_time_s\n");
      std::fprintf(f, "%.10g,%.10g,%.10g,%.10g,%.10g,%.10g\n", speed, bl_angle,
                   bl_h0, bl_g, range, time);
      std::fclose(f);
    }
    return 0;
  }

  if (cb->parsed()) {
    double worst = 0.0;
    check(armada_calibrate_run(cb_in.c_str(), opt_path(cb_out), cb_sweep,
                               &worst));
    std::printf("max_roundtrip_a=%.3e\n", worst);
    return 0;
  }

  fail("usage", "no subcommand given");
}
