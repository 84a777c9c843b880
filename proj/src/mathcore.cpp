#include "omnidyn/mathcore.hpp"

#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>

namespace omnidyn {

Rotation::Rotation(const Mat3& m) : m_(m) {
  if (!all_finite(m)) {
    throw InvalidArgument("rotation: non-finite entries");
  }
  if (orthonormality_error() > kOrthoTol || std::abs(m.determinant() - 1.0) > kOrthoTol) {
    throw InvalidArgument("rotation: matrix is not in SO(3)");
  }
}

Rotation Rotation::orthonormalized(const Mat3& m) {
  if (!all_finite(m)) {
    throw NumericalError("rotation: cannot orthonormalize non-finite matrix");
  }
  Eigen::JacobiSVD<Mat3> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Mat3 u = svd.matrixU();
  const Mat3& v = svd.matrixV();
  if ((u * v.transpose()).determinant() < 0.0) {
    u.col(2) = -u.col(2);
  }
  return Rotation(u * v.transpose(), Unchecked{});
}

double Rotation::orthonormality_error() const {
  return (m_.transpose() * m_ - Mat3::Identity()).cwiseAbs().maxCoeff();
}

bool all_finite(const Vec3& v) { return v.allFinite(); }
bool all_finite(const Mat3& m) { return m.allFinite(); }

Mat3 hat(const Vec3& v) {
  Mat3 m;
  m << 0.0, -v.z(), v.y(),
       v.z(), 0.0, -v.x(),
       -v.y(), v.x(), 0.0;
  return m;
}

Vec3 vee(const Mat3& m) {
  const double asym = (m + m.transpose()).cwiseAbs().maxCoeff();
  if (!(asym <= kSkewTol)) {
    throw NumericalError("vee: matrix is not skew-symmetric (asymmetry " + std::to_string(asym) + ")");
  }
  return {m(2, 1), m(0, 2), m(1, 0)};
}

Rotation rotation_from_axis_angle(const Vec3& axis, double angle) {
  if (!all_finite(axis) || std::abs(axis.norm() - 1.0) > 1e-9) {
    throw InvalidArgument("rotation_from_axis_angle: axis must be a unit vector");
  }
  const Mat3 k = hat(axis.normalized());
  const Mat3 m = Mat3::Identity() + std::sin(angle) * k + (1.0 - std::cos(angle)) * k * k;
  return Rotation(m);
}

double angle_between(const Vec3& a, const Vec3& b) {
  if (a.norm() == 0.0 || b.norm() == 0.0) {
    throw InvalidArgument("angle_between: zero-length vector has no direction");
  }
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

double angle_to_plane(const Vec3& v, const Vec3& normal) {
  return std::abs(kPi / 2.0 - angle_between(v, normal));
}

double geodesic_angle(const Rotation& a, const Rotation& b) {
  const Mat3 d = a.matrix().transpose() * b.matrix();
  const double c = std::clamp((d.trace() - 1.0) / 2.0, -1.0, 1.0);
  // acos loses precision near 0; use the skew part there.
  const double s = 0.5 * Vec3(d(2, 1) - d(1, 2), d(0, 2) - d(2, 0), d(1, 0) - d(0, 1)).norm();
  return std::atan2(s, c);
}

double wrap_angle(double a) {
  double w = std::remainder(a, 2.0 * kPi);  // [-pi, pi]
  if (w <= -kPi) {
    w += 2.0 * kPi;
  }
  return w;
}

}  // namespace omnidyn
