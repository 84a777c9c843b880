#include "omnidyn/singularity.hpp"

#include "omnidyn/allocation.hpp"
#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace omnidyn {

void SingularityParams::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) {
      throw InvalidArgument("singularity params: " + what);
    }
  };
  require(freeze_angle > 0.0 && freeze_angle < damping_angle, "require 0 < freeze_angle < damping_angle");
  require(std::isfinite(damping_angle), "damping_angle must be finite");
  require(std::isfinite(bias_threshold) && bias_threshold > 0.0, "bias_threshold must be positive");
  require(std::isfinite(bias_magnitude) && bias_magnitude > 0.0, "bias_magnitude must be positive");
  require(std::isfinite(unwind_rate) && unwind_rate >= 0.0, "unwind_rate must be non-negative");
  for (int i = 0; i < kNumArms; ++i) {
    require(bias_direction[i] == 1.0 || bias_direction[i] == -1.0, "bias_direction entries must be +1 or -1");
    require(bias_direction[i] == -bias_direction[(i + 1) % kNumArms], "bias_direction must alternate between neighbouring arms");
  }
}

double z_misalignment(const Vec3& force_dir, const Vec3& body_z) {
  const double a = angle_between(force_dir, body_z);
  const double to_axis = std::min(a, kPi - a);
  const double to_plane = std::abs(kPi / 2.0 - a);
  return std::min(to_axis, to_plane);
}

double tilt_bias_multiplier(double phi, const SingularityParams& params) {
  if (phi >= params.bias_threshold) {
    return 0.0;
  }
  const double r = 1.0 - phi / params.bias_threshold;
  return r * r;
}

ArmArray apply_tilt_bias(const ArmArray& delta_alpha, double k_t, const SingularityParams& params) {
  ArmArray out{};
  for (int i = 0; i < kNumArms; ++i) {
    out[i] = delta_alpha[i] + k_t * params.bias_direction[i] * params.bias_magnitude;
  }
  return out;
}

double arm_alignment(const Vec3& force_dir, int arm, const VehicleParams& vehicle) {
  if (arm < 0 || arm >= kNumArms) {
    throw InvalidArgument("arm_alignment: arm index out of range");
  }
  const double g = vehicle.arm_azimuth[arm];
  const double a = angle_between(force_dir, Vec3(std::cos(g), std::sin(g), 0.0));
  return std::min(a, kPi - a);
}

double damping_multiplier(double eta, const SingularityParams& params) {
  if (eta > params.damping_angle) {
    return 0.0;
  }
  if (eta <= params.freeze_angle) {
    return 1.0;
  }
  const double r = 1.0 - (eta - params.freeze_angle) / (params.damping_angle - params.freeze_angle);
  return r * r;
}

ArmArray apply_damping_and_unwind(const ArmArray& delta_alpha_tilde, const ArmArray& k_alpha,
                                  const ArmArray& alpha_prev, const SingularityParams& params, double dt) {
  if (!(dt > 0.0)) {
    throw InvalidArgument("apply_damping_and_unwind: dt must be positive");
  }
  ArmArray out{};
  for (int i = 0; i < kNumArms; ++i) {
    const double damped = delta_alpha_tilde[i] * (1.0 - k_alpha[i]);
    const double unwind = -sign(alpha_prev[i]) * k_alpha[i] * params.unwind_rate * dt;
    const double before = alpha_prev[i] + damped;
    const double after = before + unwind;
    const bool unwind_crosses_zero =
        unwind != 0.0 && sign(before) != -sign(alpha_prev[i]) && sign(after) != sign(alpha_prev[i]);
    out[i] = unwind_crosses_zero ? -alpha_prev[i] : damped + unwind;
  }
  return out;
}

DerivativeAllocationMatrix derivative_allocation(const VehicleParams& vehicle, const ArmArray& alpha,
                                                 const RotorArray& omega_sq) {
  DerivativeAllocationMatrix m = DerivativeAllocationMatrix::Zero();
  m.leftCols<kNumRotors>() = build_A_alpha(vehicle, alpha);
  for (int j = 0; j < kNumRotors; ++j) {
    const int arm = arm_of_rotor(j);
    const double t = alpha[arm];
    const Vector6 d_col = std::cos(t) * sin_column(vehicle, j) - std::sin(t) * cos_column(vehicle, j);
    m.col(kNumRotors + arm) += d_col * omega_sq[j];
  }
  return m;
}

}  // namespace omnidyn
