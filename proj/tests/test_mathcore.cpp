#include "omnidyn/errors.hpp"
#include "omnidyn/mathcore.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace omnidyn;

namespace {

Vec3 random_vec(std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  return {g(rng), g(rng), g(rng)};
}

// Cross product written out component by component.
Vec3 cross_by_hand(const Vec3& a, const Vec3& b) {
  return {a.y() * b.z() - a.z() * b.y(), a.z() * b.x() - a.x() * b.z(), a.x() * b.y() - a.y() * b.x()};
}

}  // namespace

TEST(Hat, BasisVectors) {
  Mat3 expect;
  expect << 0, 0, 0, 0, 0, -1, 0, 1, 0;
  EXPECT_EQ(hat(Vec3::UnitX()), expect);
  EXPECT_EQ(hat(Vec3::Zero()), Mat3::Zero());
  Mat3 m;
  m << 0, -3, 2, 3, 0, -1, -2, 1, 0;
  EXPECT_EQ(hat(Vec3(1, 2, 3)), m);
}

TEST(Hat, MatchesCrossProduct) {
  std::mt19937_64 rng(1);
  for (int n = 0; n < 200; ++n) {
    const Vec3 a = random_vec(rng);
    const Vec3 b = random_vec(rng);
    EXPECT_LT((hat(a) * b - cross_by_hand(a, b)).norm(), 1e-14);
    EXPECT_LT((hat(a) + hat(a).transpose()).norm(), 1e-15);
  }
}

TEST(Vee, InvertsHat) {
  std::mt19937_64 rng(2);
  for (int n = 0; n < 100; ++n) {
    const Vec3 v = random_vec(rng);
    EXPECT_EQ(vee(hat(v)), v);
  }
}

TEST(Vee, RejectsNonSkew) {
  Mat3 m = hat(Vec3(1, 2, 3));
  m(0, 0) = 1e-3;
  EXPECT_THROW(vee(m), NumericalError);
  m = hat(Vec3(1, 2, 3));
  m(0, 1) += 1e-6;
  EXPECT_THROW(vee(m), NumericalError);
}

TEST(AxisAngle, IdentityAtZero) {
  EXPECT_LT((rotation_from_axis_angle(Vec3(0, 0.6, 0.8), 0.0).matrix() - Mat3::Identity()).norm(), 1e-15);
}

TEST(AxisAngle, QuarterTurnAboutZ) {
  const Rotation r = rot_z(kPi / 2.0);
  EXPECT_LT((r * Vec3::UnitX() - Vec3::UnitY()).norm(), 1e-15);
  EXPECT_LT((r * Vec3::UnitY() + Vec3::UnitX()).norm(), 1e-15);
}

TEST(AxisAngle, PropertiesOnRandomInputs) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ang(-2.0 * kPi, 2.0 * kPi);
  for (int n = 0; n < 200; ++n) {
    const Vec3 axis = random_vec(rng).normalized();
    const double a = ang(rng);
    const Rotation r = rotation_from_axis_angle(axis, a);
    EXPECT_LT((r * axis - axis).norm(), 1e-14);
    EXPECT_LT(r.orthonormality_error(), 1e-14);
    EXPECT_NEAR(r.matrix().determinant(), 1.0, 1e-14);
    EXPECT_NEAR(r.matrix().trace(), 1.0 + 2.0 * std::cos(a), 1e-13);
  }
}

TEST(AxisAngle, RejectsNonUnitAxis) {
  EXPECT_THROW(rotation_from_axis_angle(Vec3(1, 1, 0), 0.3), InvalidArgument);
  EXPECT_THROW(rotation_from_axis_angle(Vec3::Zero(), 0.3), InvalidArgument);
}

TEST(RotationType, ConstructorChecksSO3) {
  EXPECT_NO_THROW(Rotation(rot_x(0.4).matrix()));
  EXPECT_THROW(Rotation(2.0 * Mat3::Identity()), InvalidArgument);
  Mat3 reflect = Mat3::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(Rotation{reflect}, InvalidArgument);
}

TEST(RotationType, OrthonormalizedIsNearest) {
  Mat3 m = rot_y(0.7).matrix();
  m(0, 1) += 1e-6;
  const Rotation r = Rotation::orthonormalized(m);
  EXPECT_LT(r.orthonormality_error(), 1e-14);
  EXPECT_LT((r.matrix() - rot_y(0.7).matrix()).norm(), 1e-6);
}

TEST(Angles, AngleBetween) {
  EXPECT_NEAR(angle_between(Vec3::UnitX(), Vec3::UnitY()), kPi / 2.0, 1e-15);
  EXPECT_NEAR(angle_between(Vec3::UnitX(), -Vec3::UnitX()), kPi, 1e-15);
  EXPECT_NEAR(angle_between(Vec3(1, 1, 0), Vec3(3, 0, 0)), kPi / 4.0, 1e-15);
  EXPECT_EQ(angle_between(Vec3(2, 0, 0), Vec3(5, 0, 0)), 0.0);
  EXPECT_THROW(angle_between(Vec3::Zero(), Vec3::UnitX()), InvalidArgument);
}

TEST(Angles, AngleToPlane) {
  EXPECT_NEAR(angle_to_plane(Vec3::UnitZ(), Vec3::UnitZ()), kPi / 2.0, 1e-15);
  EXPECT_NEAR(angle_to_plane(Vec3::UnitX(), Vec3::UnitZ()), 0.0, 1e-15);
  EXPECT_NEAR(angle_to_plane(Vec3(1, 0, 1), Vec3::UnitZ()), kPi / 4.0, 1e-15);
  EXPECT_NEAR(angle_to_plane(Vec3(1, 0, -1), Vec3::UnitZ()), kPi / 4.0, 1e-15);
}

TEST(Angles, GeodesicAngle) {
  EXPECT_NEAR(geodesic_angle(Rotation::identity(), rot_x(0.3)), 0.3, 1e-14);
  EXPECT_NEAR(geodesic_angle(rot_z(0.2), rot_z(-0.5)), 0.7, 1e-14);
  EXPECT_NEAR(geodesic_angle(Rotation::identity(), rot_y(kPi)), kPi, 1e-7);
  EXPECT_NEAR(geodesic_angle(Rotation::identity(), rot_y(1.5 * kPi)), 0.5 * kPi, 1e-14);
}

TEST(Angles, WrapAngle) {
  EXPECT_DOUBLE_EQ(wrap_angle(0.5), 0.5);
  EXPECT_DOUBLE_EQ(wrap_angle(kPi), kPi);
  EXPECT_DOUBLE_EQ(wrap_angle(-kPi), kPi);
  EXPECT_NEAR(wrap_angle(3.0 * kPi / 2.0), -kPi / 2.0, 1e-15);
  EXPECT_NEAR(wrap_angle(-7.0), -7.0 + 2.0 * kPi, 1e-15);
  for (double a = -20.0; a < 20.0; a += 0.37) {
    const double w = wrap_angle(a);
    EXPECT_GT(w, -kPi);
    EXPECT_LE(w, kPi);
    EXPECT_NEAR(std::remainder(w - a, 2.0 * kPi), 0.0, 1e-13);
  }
}

TEST(Helpers, SignAndDegrees) {
  EXPECT_EQ(sign(-2.0), -1.0);
  EXPECT_EQ(sign(0.0), 0.0);
  EXPECT_EQ(sign(1e-300), 1.0);
  EXPECT_DOUBLE_EQ(deg2rad(180.0), kPi);
  EXPECT_DOUBLE_EQ(rad2deg(kPi / 2.0), 90.0);
  EXPECT_FALSE(all_finite(Vec3(0, NAN, 0)));
  EXPECT_TRUE(all_finite(Mat3(Mat3::Identity())));
}
