#pragma once

#include <string>
#include <utility>
#include <vector>

namespace armada {

/// Measured (current, torque) sample pairs for one actuator type. Both
/// columns must be strictly increasing so the map is invertible. No (0, 0)
/// sample is assumed: the data decides the intercept.
struct CalibrationTable {
  std::vector<std::pair<double, double>> samples;  // (current A, torque N*m)

  void validate() const;  // throws Error(Invariant) naming the bad sample
};

/// Piecewise-linear interpolation inside the sample range, linear
/// extrapolation with the end-segment slope outside it.
double torque_from_current(const CalibrationTable& table, double current);

/// Exact monotone inverse of torque_from_current, extrapolated the same way.
double current_from_torque(const CalibrationTable& table, double torque);

/// CSV with header `current_A,torque_Nm`, rows sorted ascending.
CalibrationTable load_calibration_csv(const std::string& path);
CalibrationTable parse_calibration_csv(const std::string& text);
std::string serialize_calibration_csv(const CalibrationTable& table);

}  // namespace armada
