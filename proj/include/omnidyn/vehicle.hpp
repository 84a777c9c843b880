#pragma once

/**
 * @file vehicle.hpp
 * @brief Physical parameters, actuator models and Newton-Euler dynamics of
 *        the 12-rotor / 6-tilt-arm vehicle.
 *
 * Rotor numbering: rotor j in [0, 6) is the upper rotor of arm j, rotor
 * j + 6 the lower rotor of the same arm. All arrays are 0-based.
 */

#include "omnidyn/mathcore.hpp"

#include <array>
#include <functional>

namespace omnidyn {

inline constexpr int kNumArms = 6;
inline constexpr int kNumRotors = 12;

using ArmArray = std::array<double, kNumArms>;
using RotorArray = std::array<double, kNumRotors>;
using Vector6 = Eigen::Matrix<double, 6, 1>;

constexpr int arm_of_rotor(int rotor) { return rotor % kNumArms; }

struct VehicleParams {
  double mass{4.0};                                      // kg
  Mat3 inertia{Eigen::Vector3d(0.08, 0.08, 0.14).asDiagonal()};  // kg m^2, principal axes
  Vec3 com_offset{Vec3::Zero()};                         // m
  double arm_length{0.3};                                // m
  ArmArray arm_azimuth{};                                // rad
  RotorArray spin{};                                     // +1 / -1
  double thrust_coeff{1.0e-5};                           // N / (rad/s)^2
  double drag_coeff{0.016};                              // m
  double omega_sq_max{1.0e6};                            // (rad/s)^2
  double tilt_rate_max{6.0};                             // rad/s
  double gravity{9.81};                                  // m/s^2

  double weight() const { return mass * gravity; }
  double max_rotor_thrust() const { return thrust_coeff * omega_sq_max; }

  /// Throws InvalidArgument naming the first violated invariant.
  void validate() const;
};

/// Canonical parameter set: 4 kg, equally spaced arms, 10 N per rotor at the operating limit.
VehicleParams default_params();

struct RigidBodyState {
  Vec3 position{Vec3::Zero()};   // inertial, m
  Vec3 velocity{Vec3::Zero()};   // inertial, m/s
  Rotation attitude{};           // body -> inertial
  Vec3 body_rate{Vec3::Zero()};  // body, rad/s

  bool finite() const;
};

struct StateDerivative {
  Vec3 position_dot{Vec3::Zero()};
  Vec3 velocity_dot{Vec3::Zero()};
  Mat3 attitude_dot{Mat3::Zero()};
  Vec3 body_rate_dot{Vec3::Zero()};
};

struct ActuatorState {
  ArmArray tilt{};        // rad, unwrapped servo angle
  RotorArray omega_sq{};  // (rad/s)^2
};

/// Body-frame force and torque.
struct Wrench {
  Vec3 force{Vec3::Zero()};
  Vec3 torque{Vec3::Zero()};

  Vector6 to_vector() const;
  static Wrench from_vector(const Vector6& v);
  bool finite() const;
};

/// c_f * Omega. Throws InvalidArgument for negative Omega.
double rotor_thrust(double omega_sq, double thrust_coeff);

/// Moves @p alpha_prev toward @p alpha_cmd along the shorter way round,
/// by at most alpha_dot_max * dt. The result is not wrapped.
double tilt_rate_limit(double alpha_prev, double alpha_cmd, double dt, double alpha_dot_max);

/// prev + sign(delta) * min(|delta|, max_step)
double limit_tilt_step(double alpha_prev, double delta, double max_step);

/**
 * Newton-Euler derivative for a thrust-only body wrench. Gravity acts along
 * inertial -z. The wrench torque is taken about the body origin and shifted
 * to the centre of mass by -com_offset x F.
 */
StateDerivative rigid_body_derivative(const RigidBodyState& state, const Wrench& thrust_wrench,
                                      const VehicleParams& params);

using WrenchFn = std::function<Wrench(double)>;

/// One classical RK4 step from time @p t, followed by re-orthonormalization.
/// Throws NumericalError if any intermediate value is non-finite.
RigidBodyState integrate_step(const RigidBodyState& state, double t, const WrenchFn& wrench_fn, double dt,
                              const VehicleParams& params);

}  // namespace omnidyn
