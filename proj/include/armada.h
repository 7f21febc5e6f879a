#ifndef ARMADA_H
#define ARMADA_H

/* C interface to the armada library. Every function returns a status code;
 * results come back through out-pointers. On any non-zero status,
 * armada_last_error() holds a message for the calling thread. Handles must
 * be released with the matching _free call. Angles are radians, lengths
 * meters, masses kilograms, torques newton-meters, currents amperes. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum armada_status {
  ARMADA_OK = 0,
  ARMADA_ERR_INVALID_ARGUMENT = 1,
  ARMADA_ERR_PARSE = 2,
  ARMADA_ERR_INVARIANT = 3,
  ARMADA_ERR_IO = 4,
  ARMADA_ERR_NUMERIC = 5,
  ARMADA_ERR_STATE = 6,
  ARMADA_ERR_UNKNOWN = 7
} armada_status;

typedef struct armada_model armada_model;
typedef struct armada_scene armada_scene;
typedef struct armada_calibration armada_calibration;

const char* armada_version(void);

/* Message for the last failing call on this thread; empty string if none. */
const char* armada_last_error(void);

/* --- models and scenes -------------------------------------------------- */

armada_status armada_model_default(armada_model** out);
armada_status armada_model_load(const char* path, armada_model** out);
armada_status armada_model_save(const armada_model* m, const char* path);
void armada_model_free(armada_model* m);

/* Shifts the arm base in world coordinates (dx, dy, dz in meters). */
armada_status armada_model_translate_base(armada_model* m, double dx,
                                          double dy, double dz);
/* Multiplies every joint velocity limit by `scale` (> 0). */
armada_status armada_model_scale_velocity_limits(armada_model* m,
                                                 double scale);

armada_status armada_scene_default(armada_scene** out);
armada_status armada_scene_load(const char* path, armada_scene** out);
void armada_scene_free(armada_scene* s);

/* --- kinematics and actuation ------------------------------------------- */

/* End-effector pose for joint angles q[6]: out_pose = px py pz qw qx qy qz
 * (unit quaternion, qw >= 0). */
armada_status armada_model_fk(const armada_model* m, const double q[6],
                              double out_pose[7]);

/* World-frame geometric Jacobian, row-major 6x6 (linear rows first). */
armada_status armada_model_jacobian(const armada_model* m, const double q[6],
                                    double out_jac[36]);

/* Gravity-compensation joint torques with a payload (kg, >= 0) at the EE. */
armada_status armada_model_gravity_torques(const armada_model* m,
                                           const double q[6], double payload,
                                           double out_tau[6]);

/* Per-actuator |current| / nominal current for holding joint torques tau. */
armada_status armada_model_current_ratios(const armada_model* m,
                                          const double q[6], double payload,
                                          double out_ratios[6]);

armada_status armada_calibration_load(const char* path,
                                      armada_calibration** out);
armada_status armada_calibration_save(const armada_calibration* c,
                                      const char* path);
void armada_calibration_free(armada_calibration* c);

armada_status armada_torque_from_current(const armada_calibration* c,
                                         double current, double* out_torque);
armada_status armada_current_from_torque(const armada_calibration* c,
                                         double torque, double* out_current);

/* --- analysis ------------------------------------------------------------ */

/* Repeatability radius mu + 3 sigma from stage statistics (all mm). */
armada_status armada_repeatability_radius(double mu, double sigma,
                                          double* out_r);

/* Reads `target_id,x_mm,y_mm,z_mm` rows, writes a per-target report CSV and
 * returns the averages over targets (mm). */
armada_status armada_repeatability_run(const char* input_csv,
                                       const char* output_csv,
                                       double* out_avg_mu,
                                       double* out_avg_sigma,
                                       double* out_avg_r);

/* Drag-free flight from height h0 (m) at speed v (m/s), elevation angle
 * (rad). Outputs horizontal range (m) and flight time (s). */
armada_status armada_ballistic_range(double v, double angle, double h0,
                                     double g, double* out_range,
                                     double* out_time);

/* Launch speed (m/s) that lands a drag-free projectile at `range`. */
armada_status armada_required_launch_speed(double range, double angle,
                                           double h0, double g,
                                           double* out_speed);

/* Mean contact force (N) from impulse-momentum: m * dv / dt. */
armada_status armada_impact_force(double mass, double dv, double dt,
                                  double* out_force);

/* --- runners -------------------------------------------------------------- */

/* PD-tracked flexed-to-extended sweep. Writes the trajectory CSV when
 * csv_path is non-NULL. dt in seconds (<= 0 for the default 5e-4),
 * vel_scale multiplies the joint velocity limits. Out pointers may be NULL. */
armada_status armada_speed_test(const armada_model* m, double dt,
                                double vel_scale, const char* csv_path,
                                double* out_max_speed, double* out_mean_speed,
                                double* out_t_at_max, long long* out_rows);

/* Rolls `episodes` episodes of `task` ("bump", "card", "card-lite") under
 * `policy` ("zero", "random", "scripted", "linear"). params_path is the
 * linear policy parameter file (one number per line), NULL otherwise.
 * scenario selects the bump start/goal halves (1 or 2). dr: 0 off, 1 on,
 * -1 task default. Writes `seed,success,steps,final_kp_err` rows to
 * csv_path when non-NULL. */
armada_status armada_env_evaluate(const armada_model* m,
                                  const armada_scene* s, const char* task,
                                  int scenario, const char* policy,
                                  const char* params_path, int episodes,
                                  uint64_t seed, int threads, int dr,
                                  const char* csv_path,
                                  double* out_success_rate,
                                  double* out_mean_return);

/* Cross-entropy policy search on `task`. Writes the parameter vector to
 * params_path (one number per line) and the per-iteration mean return to
 * curve_path ("iteration,mean_return") when the paths are non-NULL. */
armada_status armada_train_cem(const armada_model* m, const armada_scene* s,
                               const char* task, int iterations,
                               int population, double elite_frac,
                               int episodes_per_candidate, uint64_t seed,
                               int threads, const char* params_path,
                               const char* curve_path, double* out_init_return,
                               double* out_final_return);

/* Retargets a human keypoint stream (JSON lines) onto a left/right arm pair.
 * human_arm_length in meters (> 0). Writes `t,q1..q6` per arm and an error
 * CSV `t,left_elbow_mm,left_wrist_mm,right_elbow_mm,right_wrist_mm`. Output
 * paths may be NULL to skip. Out pointers give the worst wrist tracking
 * error per arm in mm. */
armada_status armada_retarget_run(const armada_model* left,
                                  const armada_model* right,
                                  const char* keypoints_jsonl,
                                  double human_arm_length,
                                  const char* left_csv, const char* right_csv,
                                  const char* error_csv,
                                  double* out_left_wrist_mm,
                                  double* out_right_wrist_mm);

/* Fits the piecewise-linear torque map to `input_csv`
 * (current_a,torque_nm), writes a dense current sweep
 * `current_a,torque_nm,current_back_a` with `sweep_points` rows, and
 * reports the worst |current - current_back| over the sweep (A). */
armada_status armada_calibrate_run(const char* input_csv,
                                   const char* output_csv, int sweep_points,
                                   double* out_max_roundtrip_a);

#ifdef __cplusplus
}
#endif

#endif /* ARMADA_H */
