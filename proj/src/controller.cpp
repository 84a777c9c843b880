#include "omnidyn/controller.hpp"

#include "omnidyn/errors.hpp"

#include <cmath>

namespace omnidyn {

void Gains::validate() const {
  for (double g : {position, velocity, attitude, angular_rate}) {
    if (!(std::isfinite(g) && g > 0.0)) {
      throw InvalidArgument("gains: all gains must be positive");
    }
  }
}

Vec3 attitude_error(const Rotation& attitude, const Rotation& setpoint) {
  const Mat3& r = attitude.matrix();
  const Mat3& r_sp = setpoint.matrix();
  return 0.5 * vee(r_sp.transpose() * r - r.transpose() * r_sp);
}

ControlErrors compute_errors(const RigidBodyState& state, const TrajectorySetpoint& sp) {
  const Mat3& r = state.attitude.matrix();
  ControlErrors e;
  e.position = state.position - sp.position;
  e.velocity = state.velocity - sp.velocity;
  e.attitude = attitude_error(state.attitude, sp.attitude);
  e.angular_rate = state.body_rate - r.transpose() * sp.attitude.matrix() * sp.body_rate;
  return e;
}

Wrench control_wrench(const ControlErrors& errors, const RigidBodyState& state, const TrajectorySetpoint& sp,
                      const Gains& gains, const VehicleParams& params) {
  const Mat3& r = state.attitude.matrix();
  const Vec3& w = state.body_rate;
  const Vec3 g_comp(0.0, 0.0, params.gravity);

  const Vec3 accel = -gains.position * errors.position - gains.velocity * errors.velocity + sp.acceleration + g_comp;
  Wrench out;
  out.force = params.mass * (r.transpose() * accel + w.cross(r.transpose() * state.velocity));
  out.torque = params.inertia * (-gains.attitude * errors.attitude - gains.angular_rate * errors.angular_rate) +
               w.cross(params.inertia * w) + params.com_offset.cross(out.force);
  return out;
}

}  // namespace omnidyn
