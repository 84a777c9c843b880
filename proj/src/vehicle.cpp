#include "omnidyn/vehicle.hpp"

#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omnidyn {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) {
    throw InvalidArgument("vehicle params: " + what);
  }
}

struct RawState {
  Vec3 x, v;
  Mat3 r;
  Vec3 w;
};

RawState derivative(const RawState& s, const Wrench& wrench, const VehicleParams& p) {
  const Vec3 tau_com = wrench.torque - p.com_offset.cross(wrench.force);
  RawState d;
  d.x = s.v;
  d.v = s.r * wrench.force / p.mass - Vec3(0.0, 0.0, p.gravity);
  d.r = s.r * hat(s.w);
  d.w = p.inertia.inverse() * (tau_com - s.w.cross(p.inertia * s.w));
  return d;
}

RawState axpy(const RawState& s, const RawState& d, double h) {
  return {s.x + h * d.x, s.v + h * d.v, s.r + h * d.r, s.w + h * d.w};
}

bool finite(const RawState& s) {
  return s.x.allFinite() && s.v.allFinite() && s.r.allFinite() && s.w.allFinite();
}

}  // namespace

void VehicleParams::validate() const {
  require(std::isfinite(mass) && mass > 0.0, "mass must be positive");
  require(inertia.allFinite(), "inertia must be finite");
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      if (r == c) {
        require(inertia(r, c) > 0.0, "inertia diagonal must be positive");
      } else {
        require(std::abs(inertia(r, c)) <= 1e-12, "inertia must be diagonal (principal axes)");
      }
    }
  }
  require(com_offset.allFinite(), "com_offset must be finite");
  require(std::isfinite(arm_length) && arm_length > 0.0, "arm_length must be positive");
  require(std::isfinite(thrust_coeff) && thrust_coeff > 0.0, "thrust_coeff must be positive");
  require(std::isfinite(drag_coeff) && drag_coeff > 0.0, "drag_coeff must be positive");
  require(std::isfinite(omega_sq_max) && omega_sq_max > 0.0, "omega_sq_max must be positive");
  require(std::isfinite(tilt_rate_max) && tilt_rate_max > 0.0, "tilt_rate_max must be positive");
  require(std::isfinite(gravity) && gravity >= 0.0, "gravity must be non-negative");
  for (int i = 0; i < kNumArms; ++i) {
    require(std::isfinite(arm_azimuth[i]), "arm_azimuth must be finite");
    require(spin[i] == 1.0 || spin[i] == -1.0, "spin entries must be +1 or -1");
    require(spin[i + kNumArms] == -spin[i], "upper and lower rotors of an arm must counter-rotate");
  }
}

VehicleParams default_params() {
  VehicleParams p;
  for (int i = 0; i < kNumArms; ++i) {
    p.arm_azimuth[i] = i * kPi / 3.0;
    p.spin[i] = (i % 2 == 0) ? 1.0 : -1.0;
    p.spin[i + kNumArms] = -p.spin[i];
  }
  return p;
}

bool RigidBodyState::finite() const {
  return position.allFinite() && velocity.allFinite() && attitude.matrix().allFinite() && body_rate.allFinite();
}

Vector6 Wrench::to_vector() const {
  Vector6 v;
  v << force, torque;
  return v;
}

Wrench Wrench::from_vector(const Vector6& v) { return {v.head<3>(), v.tail<3>()}; }

bool Wrench::finite() const { return force.allFinite() && torque.allFinite(); }

double rotor_thrust(double omega_sq, double thrust_coeff) {
  if (!(omega_sq >= 0.0)) {
    throw InvalidArgument("rotor_thrust: squared rotor speed must be non-negative");
  }
  return thrust_coeff * omega_sq;
}

double limit_tilt_step(double alpha_prev, double delta, double max_step) {
  return alpha_prev + sign(delta) * std::min(std::abs(delta), max_step);
}

double tilt_rate_limit(double alpha_prev, double alpha_cmd, double dt, double alpha_dot_max) {
  if (!(dt > 0.0)) {
    throw InvalidArgument("tilt_rate_limit: dt must be positive");
  }
  return limit_tilt_step(alpha_prev, wrap_angle(alpha_cmd - alpha_prev), alpha_dot_max * dt);
}

StateDerivative rigid_body_derivative(const RigidBodyState& state, const Wrench& thrust_wrench,
                                      const VehicleParams& params) {
  const RawState d = derivative({state.position, state.velocity, state.attitude.matrix(), state.body_rate},
                                thrust_wrench, params);
  return {d.x, d.v, d.r, d.w};
}

RigidBodyState integrate_step(const RigidBodyState& state, double t, const WrenchFn& wrench_fn, double dt,
                              const VehicleParams& params) {
  if (!(dt > 0.0)) {
    throw InvalidArgument("integrate_step: dt must be positive");
  }
  const RawState s0{state.position, state.velocity, state.attitude.matrix(), state.body_rate};
  const Wrench w0 = wrench_fn(t);
  const Wrench wm = wrench_fn(t + 0.5 * dt);
  const Wrench w1 = wrench_fn(t + dt);

  const RawState k1 = derivative(s0, w0, params);
  const RawState k2 = derivative(axpy(s0, k1, 0.5 * dt), wm, params);
  const RawState k3 = derivative(axpy(s0, k2, 0.5 * dt), wm, params);
  const RawState k4 = derivative(axpy(s0, k3, dt), w1, params);

  RawState s1 = s0;
  s1 = axpy(s1, k1, dt / 6.0);
  s1 = axpy(s1, k2, dt / 3.0);
  s1 = axpy(s1, k3, dt / 3.0);
  s1 = axpy(s1, k4, dt / 6.0);

  if (!finite(s1) || !finite(k1) || !finite(k2) || !finite(k3) || !finite(k4)) {
    throw NumericalError("integrate_step: non-finite state (simulation blow-up)");
  }
  RigidBodyState out;
  out.position = s1.x;
  out.velocity = s1.v;
  out.attitude = Rotation::orthonormalized(s1.r);
  out.body_rate = s1.w;
  return out;
}

}  // namespace omnidyn
