#include "armada/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

namespace armada {
namespace ana {

RepeatabilityStats repeatability(const std::vector<Vec3>& points) {
  const size_t n = points.size();
  if (n < 2)
    throw Error(ErrorKind::InvalidArgument,
                "repeatability needs at least 2 points, got " +
                    std::to_string(n));
  RepeatabilityStats out;
  for (const Vec3& p : points) out.mean_position += p;
  out.mean_position /= static_cast<double>(n);

  std::vector<double> d(n);
  for (size_t i = 0; i < n; ++i) {
    d[i] = (points[i] - out.mean_position).norm();
    out.mu += d[i];
  }
  out.mu /= static_cast<double>(n);
  double ss = 0.0;
  for (double di : d) ss += (di - out.mu) * (di - out.mu);
  out.sigma = std::sqrt(ss / static_cast<double>(n - 1));
  out.r = r_from_mu_sigma(out.mu, out.sigma);
  return out;
}

double r_from_mu_sigma(double mu, double sigma) { return mu + 3.0 * sigma; }

RepeatabilityReport repeatability_report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int number = 0;
  bool saw_header = false;
  std::vector<std::string> order;
  std::map<std::string, std::vector<Vec3>> groups;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!saw_header) {
      saw_header = true;  // header row: target_id,x_mm,y_mm,z_mm
      continue;
    }
    std::istringstream ls(line);
    std::string id, xs, ys, zs;
    if (!std::getline(ls, id, ',') || !std::getline(ls, xs, ',') ||
        !std::getline(ls, ys, ',') || !std::getline(ls, zs))
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) +
                      ": expected 'target_id,x_mm,y_mm,z_mm'");
    Vec3 p;
    try {
      p = Vec3(std::stod(xs), std::stod(ys), std::stod(zs));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Parse,
                  "line " + std::to_string(number) + ": bad number");
    }
    if (groups.find(id) == groups.end()) order.push_back(id);
    groups[id].push_back(p);
  }
  if (groups.empty())
    throw Error(ErrorKind::Parse, "repeatability csv has no data rows");

  RepeatabilityReport report;
  for (const std::string& id : order) {
    RepeatabilityRow row;
    row.target_id = id;
    row.samples = static_cast<int>(groups[id].size());
    try {
      row.stats = repeatability(groups[id]);
    } catch (const Error& e) {
      throw Error(e.kind(), "target '" + id + "': " + e.what());
    }
    report.avg_mu += row.stats.mu;
    report.avg_sigma += row.stats.sigma;
    report.avg_r += row.stats.r;
    report.rows.push_back(row);
  }
  double n = static_cast<double>(report.rows.size());
  report.avg_mu /= n;
  report.avg_sigma /= n;
  report.avg_r /= n;
  return report;
}

std::string serialize_repeatability_report(const RepeatabilityReport& report) {
  std::ostringstream out;
  char buf[160];
  out << "target_id,samples,mu_mm,sigma_mm,r_mm\n";
  for (const auto& row : report.rows) {
    std::snprintf(buf, sizeof(buf), "%s,%d,%.3f,%.3f,%.3f\n",
                  row.target_id.c_str(), row.samples, row.stats.mu,
                  row.stats.sigma, row.stats.r);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "Average,,%.3f,%.3f,%.3f\n", report.avg_mu,
                report.avg_sigma, report.avg_r);
  out << buf;
  return out.str();
}

BallisticResult ballistic_range(double v, double angle, double h0, double g) {
  if (h0 < 0.0)
    throw Error(ErrorKind::InvalidArgument, "release height must be >= 0");
  if (g <= 0.0) throw Error(ErrorKind::InvalidArgument, "gravity must be > 0");
  double vz = v * std::sin(angle);
  double vx = v * std::cos(angle);
  double disc = vz * vz + 2.0 * g * h0;
  if (disc < 0.0)
    throw Error(ErrorKind::Numeric, "no ground impact for these parameters");
  double t = (vz + std::sqrt(disc)) / g;
  BallisticResult out;
  if (t <= 0.0) return out;  // launched at ground level, not upward
  out.flight_time = t;
  out.range = vx * t;
  return out;
}

double required_launch_speed(double range, double angle, double h0, double g) {
  if (range <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "range must be > 0");
  if (std::abs(std::cos(angle)) < 1e-9)
    throw Error(ErrorKind::InvalidArgument,
                "vertical launch cannot reach a positive range");
  auto f = [&](double v) { return ballistic_range(v, angle, h0, g).range; };
  double lo = 0.0, hi = 1.0;
  int guard = 0;
  while (f(hi) < range) {
    hi *= 2.0;
    if (++guard > 60)
      throw Error(ErrorKind::InvalidArgument,
                  "range unreachable at this angle");
  }
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (f(mid) < range)
      lo = mid;
    else
      hi = mid;
    if (hi - lo < 1e-12 * std::max(1.0, hi)) break;
  }
  double v = 0.5 * (lo + hi);
  if (std::abs(f(v) - range) > 1e-6)
    throw Error(ErrorKind::Numeric, "launch speed bisection did not converge");
  return v;
}

double impact_force(double m_eff, double dv, double dt) {
  if (dt <= 0.0)
    throw Error(ErrorKind::InvalidArgument, "impact duration must be > 0");
  return m_eff * dv / dt;
}

SpeedMetrics speed_metrics(const std::vector<Vec3>& positions, double dt) {
  if (positions.size() < 3)
    throw Error(ErrorKind::InvalidArgument,
                "speed metrics need at least 3 samples");
  if (dt <= 0.0) throw Error(ErrorKind::InvalidArgument, "dt must be > 0");
  SpeedMetrics out;
  double sum = 0.0;
  for (size_t i = 1; i + 1 < positions.size(); ++i) {
    double s = (positions[i + 1] - positions[i - 1]).norm() / (2.0 * dt);
    sum += s;
    if (s > out.max_speed) {
      out.max_speed = s;
      out.t_at_max = static_cast<double>(i) * dt;
    }
  }
  out.mean_speed = sum / static_cast<double>(positions.size() - 2);
  return out;
}

}  // namespace ana
}  // namespace armada
