#pragma once

/**
 * @file singularity.hpp
 * @brief Tilt-arm singularity handling.
 *
 * Two families are handled:
 *  - kinematic: desired force close to the body z axis or the body z plane.
 *    An alternating tilt bias keeps the instantaneous allocation full rank.
 *  - arm alignment: desired force close to an arm axis. The arm's tilt
 *    motion is damped to a standstill and slowly unwound toward zero.
 */

#include "omnidyn/mathcore.hpp"
#include "omnidyn/vehicle.hpp"

namespace omnidyn {

struct SingularityParams {
  double freeze_angle{deg2rad(5.0)};         // phi_0
  double damping_angle{deg2rad(15.0)};       // phi_d
  double bias_threshold{deg2rad(10.0)};      // phi_t
  double bias_magnitude{deg2rad(10.0)};      // c_t
  double unwind_rate{8.0};                   // omega_u, rad/s
  ArmArray bias_direction{-1, 1, -1, 1, -1, 1};  // b_i = (-1)^i for arms 1..6
  bool enabled{true};                        // false: pipeline runs without bias, damping or unwinding

  void validate() const;
};

/// Matrix mapping (Omega_dot[12], alpha_dot[6]) to the body wrench rate.
using DerivativeAllocationMatrix = Eigen::Matrix<double, 6, kNumRotors + kNumArms>;

/// Angle from @p force_dir to the nearer of the z axis line and the plane normal to it, in [0, pi/4].
double z_misalignment(const Vec3& force_dir, const Vec3& body_z = Vec3::UnitZ());

/// k_t: 0 for phi >= phi_t, (1 - phi/phi_t)^2 below.
double tilt_bias_multiplier(double phi, const SingularityParams& params);

/// delta_alpha_i + k_t * b_i * c_t
ArmArray apply_tilt_bias(const ArmArray& delta_alpha, double k_t, const SingularityParams& params);

/// Angle between @p force_dir and the line through arm @p arm (0-based), in [0, pi/2].
double arm_alignment(const Vec3& force_dir, int arm, const VehicleParams& vehicle);

/// k_alpha: 1 up to phi_0, quadratic ramp to 0 at phi_d, 0 beyond.
double damping_multiplier(double eta, const SingularityParams& params);

/**
 * delta* = delta~ (1 - k_alpha) - sign(alpha_prev) k_alpha omega_u dt.
 * If the unwinding term alone would carry an arm across zero the step
 * lands exactly on zero.
 */
ArmArray apply_damping_and_unwind(const ArmArray& delta_alpha_tilde, const ArmArray& k_alpha,
                                  const ArmArray& alpha_prev, const SingularityParams& params, double dt);

/// [A_alpha(alpha) | sum_j d a_j / d alpha * Omega_j]
DerivativeAllocationMatrix derivative_allocation(const VehicleParams& vehicle, const ArmArray& alpha,
                                                 const RotorArray& omega_sq);

}  // namespace omnidyn
