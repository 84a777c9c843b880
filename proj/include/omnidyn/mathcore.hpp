#pragma once

/**
 * @file mathcore.hpp
 * @brief 3D vector/matrix layer shared by every other module.
 *
 * Vec3 and Mat3 are plain Eigen fixed-size types. Rotation is a thin
 * value type over a Mat3 that is only ever constructed in SO(3).
 */

#include <Eigen/Dense>

#include <numbers>

namespace omnidyn {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kOrthoTol = 1e-9;
inline constexpr double kSkewTol = 1e-9;

constexpr double deg2rad(double deg) { return deg * kPi / 180.0; }
constexpr double rad2deg(double rad) { return rad * 180.0 / kPi; }

/// Rotation matrix (body to inertial). Invariant: R^T R = I and det R = +1 within kOrthoTol.
class Rotation {
 public:
  Rotation() : m_(Mat3::Identity()) {}

  /// Throws InvalidArgument if @p m is not orthonormal with det +1.
  explicit Rotation(const Mat3& m);

  static Rotation identity() { return Rotation(); }

  /// Nearest rotation (polar projection) to an almost-orthonormal matrix.
  static Rotation orthonormalized(const Mat3& m);

  const Mat3& matrix() const { return m_; }
  double operator()(int r, int c) const { return m_(r, c); }

  Rotation transpose() const { return Rotation(m_.transpose(), Unchecked{}); }
  Rotation operator*(const Rotation& o) const { return Rotation(m_ * o.m_, Unchecked{}); }
  Vec3 operator*(const Vec3& v) const { return m_ * v; }

  /// max |R^T R - I|
  double orthonormality_error() const;

 private:
  struct Unchecked {};
  Rotation(const Mat3& m, Unchecked) : m_(m) {}

  Mat3 m_;
};

bool all_finite(const Vec3& v);
bool all_finite(const Mat3& m);

/// Skew-symmetric matrix with hat(v) * w == v x w.
Mat3 hat(const Vec3& v);

/// Inverse of hat. Throws NumericalError if @p m is not skew within kSkewTol.
Vec3 vee(const Mat3& m);

/// Rodrigues rotation. Throws InvalidArgument unless |axis| = 1 within 1e-9.
Rotation rotation_from_axis_angle(const Vec3& axis, double angle);

inline Rotation rot_x(double a) { return rotation_from_axis_angle(Vec3::UnitX(), a); }
inline Rotation rot_y(double a) { return rotation_from_axis_angle(Vec3::UnitY(), a); }
inline Rotation rot_z(double a) { return rotation_from_axis_angle(Vec3::UnitZ(), a); }

/// Angle in [0, pi]. Throws InvalidArgument on a zero-length input.
double angle_between(const Vec3& a, const Vec3& b);

/// Angle between @p v and the plane with normal @p normal, in [0, pi/2].
double angle_to_plane(const Vec3& v, const Vec3& normal);

/// Geodesic distance on SO(3): the rotation angle of a^T b, in [0, pi].
double geodesic_angle(const Rotation& a, const Rotation& b);

/// Maps to (-pi, pi].
double wrap_angle(double a);

/// -1, 0 or +1.
inline double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

}  // namespace omnidyn
