#pragma once

#include <string>
#include <vector>

#include "armada/types.hpp"

namespace armada {
namespace ana {

struct RepeatabilityStats {
  Vec3 mean_position = Vec3::Zero();  // same unit as input (mm)
  double mu = 0.0;                    // mean distance to mean position
  double sigma = 0.0;                 // sample std of those distances
  double r = 0.0;                     // mu + 3 sigma
};

/// Distances d_i = |P_i - Pbar|; mu = mean(d), sigma uses the (d_i - mu)^2
/// sample form with N-1, R = mu + 3 sigma. Input unit carries through.
RepeatabilityStats repeatability(const std::vector<Vec3>& points_mm);

/// The final stage by itself, for checking published (mu, sigma, R) rows.
double r_from_mu_sigma(double mu, double sigma);

struct RepeatabilityRow {
  std::string target_id;
  int samples = 0;
  RepeatabilityStats stats;
};

struct RepeatabilityReport {
  std::vector<RepeatabilityRow> rows;  // per target, input order
  double avg_mu = 0.0;
  double avg_sigma = 0.0;
  double avg_r = 0.0;
};

/// CSV `target_id,x_mm,y_mm,z_mm`; rows grouped by target id (any order).
RepeatabilityReport repeatability_report_from_csv(const std::string& text);
std::string serialize_repeatability_report(const RepeatabilityReport& report);

struct BallisticResult {
  double range = 0.0;        // m
  double flight_time = 0.0;  // s
};

/// Drag-free projectile released at height h0 with speed v at `angle` above
/// horizontal; range measured where it returns to ground level.
BallisticResult ballistic_range(double v, double angle, double h0,
                                double g = kStandardGravity);

/// Launch speed whose ballistic_range matches `range` at the given angle and
/// release height (bisection, |range error| < 1e-9 m). Throws
/// Error(InvalidArgument) when the range is unreachable at that angle.
double required_launch_speed(double range, double angle, double h0,
                             double g = kStandardGravity);

/// Impulse-momentum average force m_eff * dv / dt.
double impact_force(double m_eff, double dv, double dt);

struct SpeedMetrics {
  double max_speed = 0.0;   // m/s
  double mean_speed = 0.0;  // m/s over interior samples
  double t_at_max = 0.0;    // s from the first sample
};

/// Central-difference speeds over a uniformly sampled position trace;
/// the first and last samples have no centered estimate and are skipped.
SpeedMetrics speed_metrics(const std::vector<Vec3>& positions, double dt);

}  // namespace ana
}  // namespace armada
