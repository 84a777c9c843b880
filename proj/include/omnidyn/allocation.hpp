#pragma once

/**
 * @file allocation.hpp
 * @brief Wrench-to-actuator allocation for the tilt-arm vehicle.
 *
 * The 6x24 matrix A is tilt independent: each arm contributes four columns
 * [sin upper, cos upper, sin lower, cos lower] acting on the products
 * sin(alpha_i) Omega_j and cos(alpha_i) Omega_j. Its pseudo-inverse is
 * computed once; tilt angles are recovered with atan2 and rotor speeds by
 * projecting each rotor's (sin, cos) pair onto the commanded tilt.
 */

#include "omnidyn/singularity.hpp"
#include "omnidyn/vehicle.hpp"

namespace omnidyn {

inline constexpr int kNumU = 4 * kNumArms;

using AllocationMatrix = Eigen::Matrix<double, 6, kNumU>;
using AllocationPinv = Eigen::Matrix<double, kNumU, 6>;
using InstantAllocationMatrix = Eigen::Matrix<double, 6, kNumRotors>;
using UVector = Eigen::Matrix<double, kNumU, 1>;

constexpr int u_sin_index(int rotor) { return 4 * arm_of_rotor(rotor) + (rotor >= kNumArms ? 2 : 0); }
constexpr int u_cos_index(int rotor) { return u_sin_index(rotor) + 1; }

struct ActuatorCommand {
  ArmArray tilt{};        // rad, unwrapped
  RotorArray omega_sq{};  // (rad/s)^2, in [0, omega_sq_max]
};

/// Intermediate quantities of one allocation tick, for logging and tests.
struct AllocationDiagnostics {
  ArmArray tilt_desired{};  // atan2 extraction, before singularity handling
  double misalignment{0.0};  // phi
  double tilt_bias_gain{0.0};  // k_t
  ArmArray alignment{};  // eta_i
  ArmArray damping_gain{};  // k_alpha_i
  bool direction_valid{false};  // false when |F_d| too small to define phi / eta
};

struct AllocationOptions {
  /// After the per-rotor projection, reduce the remaining wrench error with
  /// a bounded least-change correction on A_alpha(alpha_cmd).
  bool residual_correction{true};
  /// Weight on the speed change, in newtons per full-scale omega_sq. Larger
  /// values leave more residual in weakly controllable directions.
  double correction_damping{0.03};
  /// Let the correction also move tilt angles inside the rate window. The
  /// room shrinks with the tilt-bias and damping gains, so frozen arms stay
  /// frozen and the bias is not undone.
  bool tilt_correction{true};
  int correction_iterations{6};

  void validate() const;
};

/// Wrench per unit sin(alpha) Omega of @p rotor.
Vector6 sin_column(const VehicleParams& params, int rotor);
/// Wrench per unit cos(alpha) Omega of @p rotor.
Vector6 cos_column(const VehicleParams& params, int rotor);

AllocationMatrix build_A(const VehicleParams& params);
InstantAllocationMatrix build_A_alpha(const VehicleParams& params, const ArmArray& alpha);

/// u with entries sin(alpha_i) Omega_j, cos(alpha_i) Omega_j.
UVector assemble_u(const ArmArray& alpha, const RotorArray& omega_sq);

/// Moore-Penrose pseudo-inverse; throws NumericalError if A is not rank 6.
AllocationPinv pseudo_inverse(const AllocationMatrix& a);

/// A^+ w. Recomputes the pseudo-inverse; use Allocator to reuse it.
UVector pseudo_inverse_allocate(const Wrench& w_des, const AllocationMatrix& a);

/// atan2 of each arm's summed sin and cos products. Arms with both sums
/// exactly zero keep their previous angle.
ArmArray extract_tilt_angles(const UVector& u, const ArmArray& alpha_prev);

/// sin(alpha_i) u_sin,j + cos(alpha_i) u_cos,j, clamped to [0, omega_sq_max].
RotorArray extract_rotor_speeds(const UVector& u, const ArmArray& alpha, double omega_sq_max);

/**
 * Minimises |A_alpha Omega - w_des|^2 + damping^2 |(Omega - omega_sq) / omega_sq_max|^2
 * over 0 <= Omega <= omega_sq_max. The problem is strictly convex, so the
 * result is unique and varies continuously with the inputs.
 */
RotorArray refine_rotor_speeds(const InstantAllocationMatrix& a_alpha, const RotorArray& omega_sq,
                               const Wrench& w_des, double omega_sq_max, double damping);

struct TiltWindow {
  ArmArray lower{};
  ArmArray upper{};
};

/**
 * Damped Gauss-Newton refinement of a full command: each iteration
 * linearises the wrench about the current (Omega, alpha) and takes the
 * damped step that stays inside Omega in [0, omega_sq_max] and alpha in
 * @p window. Stops early once the wrench error is negligible.
 */
ActuatorCommand refine_command(const VehicleParams& params, const ActuatorCommand& cmd, const TiltWindow& window,
                               const Wrench& w_des, double damping, int iterations);

Wrench forward_wrench(const VehicleParams& params, const ArmArray& alpha, const RotorArray& omega_sq);

/// Holds A and its pseudo-inverse for one parameter set. Immutable after construction.
class Allocator {
 public:
  explicit Allocator(const VehicleParams& params, AllocationOptions options = {});

  const VehicleParams& params() const { return params_; }
  const AllocationOptions& options() const { return options_; }
  const AllocationMatrix& matrix() const { return a_; }
  const AllocationPinv& pinv() const { return a_pinv_; }

  UVector solve(const Wrench& w_des) const { return a_pinv_ * w_des.to_vector(); }

  /**
   * Full tick: pseudo-inverse, atan2 extraction, tilt bias, damping and
   * unwinding, tilt-rate limiting, rotor-speed projection and (optionally)
   * residual correction.
   */
  ActuatorCommand allocate(const Wrench& w_des, const ArmArray& alpha_prev, double dt,
                           const SingularityParams& sing, AllocationDiagnostics* diag = nullptr) const;

  /// Steady-state allocation: no singularity handling, no rate limit, no correction.
  ActuatorCommand allocate_converged(const Wrench& w_des, const ArmArray& alpha_prev = {}) const;

 private:
  VehicleParams params_;
  AllocationOptions options_;
  AllocationMatrix a_;
  AllocationPinv a_pinv_;
};

ActuatorCommand allocate(const Wrench& w_des, const ArmArray& alpha_prev, double dt, const VehicleParams& params,
                         const SingularityParams& sing);

}  // namespace omnidyn
