#pragma once

/**
 * @file controller.hpp
 * @brief Geometric SE(3) tracking controller producing a body-frame wrench.
 */

#include "omnidyn/mathcore.hpp"
#include "omnidyn/vehicle.hpp"

namespace omnidyn {

struct Gains {
  double position{36.0};      // k_p
  double velocity{12.0};      // k_v
  double attitude{150.0};     // k_R
  double angular_rate{25.0};  // k_omega

  void validate() const;
};

struct TrajectorySetpoint {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  Vec3 acceleration{Vec3::Zero()};
  Rotation attitude{};
  Vec3 body_rate{Vec3::Zero()};  // expressed in the setpoint body frame
};

struct ControlErrors {
  Vec3 position{Vec3::Zero()};      // e_p, inertial
  Vec3 velocity{Vec3::Zero()};      // e_v, inertial
  Vec3 attitude{Vec3::Zero()};      // e_R, body
  Vec3 angular_rate{Vec3::Zero()};  // e_omega, body
};

/// e_R = 1/2 (R_sp^T R - R^T R_sp)^vee
Vec3 attitude_error(const Rotation& attitude, const Rotation& setpoint);

ControlErrors compute_errors(const RigidBodyState& state, const TrajectorySetpoint& sp);

/**
 * F_d = m (R^T (-k_p e_p - k_v e_v + a_sp + g) + omega x R^T v)
 * tau_d = J (-k_R e_R - k_omega e_omega) + omega x J omega + x_com x F_d
 * with g = +g_mag z (gravity compensation).
 */
Wrench control_wrench(const ControlErrors& errors, const RigidBodyState& state, const TrajectorySetpoint& sp,
                      const Gains& gains, const VehicleParams& params);

}  // namespace omnidyn
