#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace armada {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using Vec6 = Eigen::Matrix<double, 6, 1>;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

inline constexpr int kNumJoints = 6;
inline constexpr double kStandardGravity = 9.81;

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Invariant,
  Io,
  Numeric,
  State,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg)
      : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

/// Rigid transform: rotation R plus translation p, composing left to right
/// along a chain (world = parent * local).
struct Pose {
  Mat3 R = Mat3::Identity();
  Vec3 p = Vec3::Zero();

  Pose() = default;
  Pose(const Mat3& rot, const Vec3& trans) : R(rot), p(trans) {}

  Pose operator*(const Pose& o) const { return {R * o.R, R * o.p + p}; }
  Vec3 operator*(const Vec3& v) const { return R * v + p; }

  Pose inverse() const { return {R.transpose(), -(R.transpose() * p)}; }

  static Pose identity() { return {}; }

  static Pose from_translation(const Vec3& t) {
    return {Mat3::Identity(), t};
  }

  /// x y z translation plus fixed-axis roll-pitch-yaw (applied as Rz*Ry*Rx).
  static Pose from_xyz_rpy(double x, double y, double z, double roll,
                           double pitch, double yaw) {
    Mat3 R = (Eigen::AngleAxisd(yaw, Vec3::UnitZ()) *
              Eigen::AngleAxisd(pitch, Vec3::UnitY()) *
              Eigen::AngleAxisd(roll, Vec3::UnitX()))
                 .toRotationMatrix();
    return {R, Vec3(x, y, z)};
  }
};

inline Mat3 skew(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

/// Rodrigues formula; exact rotation for a constant angular velocity step.
inline Mat3 rotation_exp(const Vec3& w) {
  double angle = w.norm();
  if (angle < 1e-12) return Mat3::Identity() + skew(w);
  return Eigen::AngleAxisd(angle, w / angle).toRotationMatrix();
}

/// Re-orthonormalizes a drifting rotation matrix (nearest by polar-ish
/// Gram-Schmidt, adequate for per-step integration drift).
inline Mat3 orthonormalize(const Mat3& R) {
  Vec3 x = R.col(0).normalized();
  Vec3 z = x.cross(R.col(1)).normalized();
  Vec3 y = z.cross(x);
  Mat3 out;
  out.col(0) = x;
  out.col(1) = y;
  out.col(2) = z;
  return out;
}

inline double wrap_angle(double a) {
  a = std::fmod(a + M_PI, 2.0 * M_PI);
  if (a < 0) a += 2.0 * M_PI;
  return a - M_PI;
}

}  // namespace armada
