#include "armada/calibration.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "armada/types.hpp"

namespace armada {

void CalibrationTable::validate() const {
  if (samples.size() < 2)
    throw Error(ErrorKind::Invariant,
                "calibration table needs at least 2 samples, got " +
                    std::to_string(samples.size()));
  for (size_t i = 0; i < samples.size(); ++i) {
    if (!std::isfinite(samples[i].first) || !std::isfinite(samples[i].second))
      throw Error(ErrorKind::Invariant, "calibration sample " +
                                            std::to_string(i + 1) +
                                            " is not finite");
    if (i > 0) {
      if (!(samples[i].first > samples[i - 1].first))
        throw Error(ErrorKind::Invariant,
                    "calibration currents must be strictly increasing at "
                    "sample " + std::to_string(i + 1));
      if (!(samples[i].second > samples[i - 1].second))
        throw Error(ErrorKind::Invariant,
                    "calibration torques must be strictly increasing at "
                    "sample " + std::to_string(i + 1));
    }
  }
}

namespace {

// Piecewise-linear through the samples; outside the data the first/last
// segment's slope continues. No (0,0) sample is assumed, so the intercept
// comes from the data alone.
double interp(const std::vector<std::pair<double, double>>& pts, double x,
              bool inverse) {
  auto key = [&](const std::pair<double, double>& p) {
    return inverse ? p.second : p.first;
  };
  auto val = [&](const std::pair<double, double>& p) {
    return inverse ? p.first : p.second;
  };
  const size_t n = pts.size();
  size_t hi = 1;
  while (hi + 1 < n && x > key(pts[hi])) ++hi;
  const auto& a = pts[hi - 1];
  const auto& b = pts[hi];
  const double t = (x - key(a)) / (key(b) - key(a));
  return val(a) + t * (val(b) - val(a));
}

}  // namespace

double torque_from_current(const CalibrationTable& table, double current) {
  table.validate();
  return interp(table.samples, current, false);
}

double current_from_torque(const CalibrationTable& table, double torque) {
  table.validate();
  return interp(table.samples, torque, true);
}

CalibrationTable parse_calibration_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  CalibrationTable table;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = line;
    trimmed.erase(0, trimmed.find_first_not_of(" \t"));
    if (trimmed.empty()) continue;
    if (!saw_header) {
      std::string squashed;
      for (char c : trimmed)
        if (!std::isspace(static_cast<unsigned char>(c))) squashed += c;
      if (squashed != "current_A,torque_Nm")
        throw Error(ErrorKind::Parse,
                    "line " + std::to_string(number) +
                        ": expected header 'current_A,torque_Nm'");
      saw_header = true;
      continue;
    }
    auto comma = trimmed.find(',');
    if (comma == std::string::npos)
      throw Error(ErrorKind::Parse, "line " + std::to_string(number) +
                                        ": expected 'current,torque'");
    try {
      double cur = std::stod(trimmed.substr(0, comma));
      double tor = std::stod(trimmed.substr(comma + 1));
      table.samples.emplace_back(cur, tor);
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) + ": bad number in '" +
                      trimmed + "'");
    }
  }
  if (!saw_header) throw Error(ErrorKind::Parse, "empty calibration csv");
  table.validate();
  return table;
}

CalibrationTable load_calibration_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open calibration csv: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_calibration_csv(ss.str());
  } catch (const Error& e) {
    throw Error(e.kind(), path + ": " + e.what());
  }
}

std::string serialize_calibration_csv(const CalibrationTable& table) {
  std::ostringstream out;
  out << "current_A,torque_Nm\n";
  out.precision(17);
  for (const auto& [cur, tor] : table.samples) out << cur << "," << tor << "\n";
  return out.str();
}

}  // namespace armada
