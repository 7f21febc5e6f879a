#include "armada/runners.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "armada/actuation.hpp"
#include "armada/dynamics.hpp"
#include "armada/kinematics.hpp"
#include "armada/simcore.hpp"

namespace armada {
namespace run {

namespace {

constexpr double kPi = 3.14159265358979323846;

double smoothstep(double u) {
  u = std::clamp(u, 0.0, 1.0);
  return u * u * (3.0 - 2.0 * u);
}

}  // namespace

SpeedTestResult speed_test(const RobotModel& model,
                           const SpeedTestConfig& config) {
  if (!(config.dt > 0.0) || !std::isfinite(config.dt)) {
    throw Error(ErrorKind::InvalidArgument, "speed_test: dt must be positive");
  }
  if (!(config.vel_scale > 0.0) || !std::isfinite(config.vel_scale)) {
    throw Error(ErrorKind::InvalidArgument,
                "speed_test: vel_scale must be positive");
  }

  RobotModel m = model;
  for (auto& joint : m.joints) joint.velocity_limit *= config.vel_scale;
  m.validate();

  const Vec6 q0 = (Vec6() << 0.0, 1.0, 0.0, 2.4, 0.8, 0.0).finished();
  const Vec6 q1 = (Vec6() << 0.0, kPi / 2.0, 0.0, 0.0, 0.0, 0.0).finished();
  const Vec6 dq = q1 - q0;

  // Smoothstep peak rate is 1.5*|dq|/T, so T = 1.5*max(|dq_j|/vlim_j) puts
  // the fastest joint exactly at its limit.
  double t_sweep = 0.0;
  for (int j = 0; j < 6; ++j) {
    t_sweep =
        std::max(t_sweep, 1.5 * std::abs(dq[j]) / m.joints[j].velocity_limit);
  }
  if (t_sweep <= 0.0) {
    throw Error(ErrorKind::Invariant, "speed_test: degenerate sweep");
  }
  const double duration = t_sweep + config.settle;

  sim::SimConfig sc;
  sc.dt = config.dt;
  sc.micro_steps = 1;
  sc.contacts_enabled = false;

  sim::WorldState world;  // arm only, free space
  world.arm.q = q0;
  world.arm.qdot.setZero();

  // Gravity feedforward plus PD with the damping scheduled off the mass
  // matrix diagonal (critical per joint), so the hold phase does not ring.
  const double kp = 200.0;
  auto control = [&](const Vec6& q_des) {
    const Vec6 ff = act::gravity_torques(m, world.arm.q, 0.0);
    const Mat6 mass = dyn::mass_matrix(m, world.arm.q);
    Vec6 tau;
    for (int j = 0; j < 6; ++j) {
      const double kd = 2.0 * std::sqrt(kp * mass(j, j));
      const double raw = ff[j] + kp * (q_des[j] - world.arm.q[j]) -
                         kd * world.arm.qdot[j];
      const double lim = m.joints[j].torque_limit;
      tau[j] = std::clamp(raw, -lim, lim);
    }
    return tau;
  };

  const long long n_steps = std::llround(duration / config.dt);
  std::vector<Vec3> ee_path;
  std::vector<Vec6> qds;
  ee_path.reserve(static_cast<size_t>(n_steps) + 1);
  qds.reserve(ee_path.capacity());
  std::vector<Vec6> qs;
  qs.reserve(ee_path.capacity());

  std::ostringstream csv;
  sim::write_dump_header(csv);

  SpeedTestResult result;
  result.duration = duration;

  auto record = [&]() {
    sim::write_dump_row(csv, world, -1);
    ee_path.push_back(kin::ee_pose(m, world.arm.q).p);
    qs.push_back(world.arm.q);
    qds.push_back(world.arm.qdot);
  };
  record();

  for (long long i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * config.dt;
    const double s = smoothstep(t / t_sweep);
    const Vec6 q_des = q0 + s * dq;
    sim::step(world, m, control(q_des), sc);
    record();
  }

  result.rows = static_cast<long long>(ee_path.size());
  result.csv = csv.str();
  result.metrics = ana::speed_metrics(ee_path, config.dt);

  const auto k =
      static_cast<size_t>(std::llround(result.metrics.t_at_max / config.dt));
  if (k < qs.size()) {
    const Mat6 jac = kin::geometric_jacobian(m, qs[k]);
    result.jv_at_max = (jac.topRows<3>() * qds[k]).norm();
  }

  return result;
}

}  // namespace run
}  // namespace armada
