#pragma once

#include <string>

#include "armada/analysis.hpp"
#include "armada/model.hpp"

namespace armada {
namespace run {

struct SpeedTestResult {
  ana::SpeedMetrics metrics;
  double duration = 0.0;     // s
  long long rows = 0;        // csv rows excluding the header
  double jv_at_max = 0.0;    // |J qdot| at the max-speed sample
  std::string csv;           // trajectory dump
};

struct SpeedTestConfig {
  double dt = 5e-4;        // s, integration and dump step
  double vel_scale = 1.0;  // scales the model's joint velocity limits
  double settle = 0.25;    // s of hold after the sweep
};

/// Flexed-to-extended sweep under PD tracking: the reference interpolates
/// between the two postures with a smoothstep timed so the fastest joint
/// peaks at its (scaled) velocity limit, then holds. Deterministic.
SpeedTestResult speed_test(const RobotModel& model,
                           const SpeedTestConfig& config = {});

}  // namespace run
}  // namespace armada
