#include "omnidyn/allocation.hpp"

#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace omnidyn {

namespace {

constexpr double kRankTol = 1e-10;
constexpr double kCorrectionStop = 1e-12;

// Minimises 0.5 x'Hx - c'x over lo <= x <= hi for symmetric positive definite
// H with a primal active-set method started from clamp(x_start).
Eigen::VectorXd solve_box_qp(const Eigen::MatrixXd& h, const Eigen::VectorXd& c, const Eigen::VectorXd& lo,
                             const Eigen::VectorXd& hi, const Eigen::VectorXd& x_start) {
  enum Bound { kFree, kLower, kUpper };
  const int n = static_cast<int>(c.size());
  std::vector<Bound> set(n, kFree);
  Eigen::VectorXd x = x_start.cwiseMax(lo).cwiseMin(hi);
  for (int j = 0; j < n; ++j) {
    if (x(j) <= lo(j)) {
      set[j] = kLower;
    } else if (x(j) >= hi(j)) {
      set[j] = kUpper;
    }
  }
  const double tol = 1e-12 * (1.0 + c.cwiseAbs().maxCoeff());

  for (int iter = 0; iter < 8 * n; ++iter) {
    std::vector<int> fr;
    for (int j = 0; j < n; ++j) {
      if (set[j] == kFree) {
        fr.push_back(j);
      }
    }
    Eigen::VectorXd target = x;
    if (!fr.empty()) {
      const int k = static_cast<int>(fr.size());
      Eigen::MatrixXd hf(k, k);
      Eigen::VectorXd rhs(k);
      for (int a = 0; a < k; ++a) {
        rhs(a) = c(fr[a]);
        for (int j = 0; j < n; ++j) {
          if (set[j] != kFree) {
            rhs(a) -= h(fr[a], j) * x(j);
          }
        }
        for (int b = 0; b < k; ++b) {
          hf(a, b) = h(fr[a], fr[b]);
        }
      }
      const Eigen::VectorXd sol = hf.llt().solve(rhs);
      for (int a = 0; a < k; ++a) {
        target(fr[a]) = sol(a);
      }
    }

    // Walk towards the subproblem minimiser, stopping at the first bound hit.
    double step = 1.0;
    int blocking = -1;
    for (int j : fr) {
      const double d = target(j) - x(j);
      if (target(j) < lo(j) && d < 0.0 && (lo(j) - x(j)) / d < step) {
        step = (lo(j) - x(j)) / d;
        blocking = j;
      } else if (target(j) > hi(j) && d > 0.0 && (hi(j) - x(j)) / d < step) {
        step = (hi(j) - x(j)) / d;
        blocking = j;
      }
    }
    x += step * (target - x);
    if (blocking >= 0) {
      const bool low = target(blocking) < lo(blocking);
      x(blocking) = low ? lo(blocking) : hi(blocking);
      set[blocking] = low ? kLower : kUpper;
      continue;
    }

    // Subproblem optimum is feasible: release the bound with the worst multiplier.
    const Eigen::VectorXd grad = h * x - c;
    int release = -1;
    double worst = tol;
    for (int j = 0; j < n; ++j) {
      if (lo(j) == hi(j)) {
        continue;
      }
      const double v = set[j] == kLower ? -grad(j) : (set[j] == kUpper ? grad(j) : 0.0);
      if (v > worst) {
        worst = v;
        release = j;
      }
    }
    if (release < 0) {
      break;
    }
    set[release] = kFree;
  }
  return x;
}

}  // namespace

Vector6 sin_column(const VehicleParams& p, int rotor) {
  const double g = p.arm_azimuth[arm_of_rotor(rotor)];
  const double s = p.spin[rotor];
  const double sg = std::sin(g);
  const double cg = std::cos(g);
  Vector6 c;
  c << sg, -cg, 0.0, -s * p.drag_coeff * sg, s * p.drag_coeff * cg, -p.arm_length;
  return p.thrust_coeff * c;
}

Vector6 cos_column(const VehicleParams& p, int rotor) {
  const double g = p.arm_azimuth[arm_of_rotor(rotor)];
  const double s = p.spin[rotor];
  Vector6 c;
  c << 0.0, 0.0, 1.0, p.arm_length * std::sin(g), -p.arm_length * std::cos(g), -s * p.drag_coeff;
  return p.thrust_coeff * c;
}

AllocationMatrix build_A(const VehicleParams& params) {
  AllocationMatrix a;
  for (int j = 0; j < kNumRotors; ++j) {
    a.col(u_sin_index(j)) = sin_column(params, j);
    a.col(u_cos_index(j)) = cos_column(params, j);
  }
  return a;
}

InstantAllocationMatrix build_A_alpha(const VehicleParams& params, const ArmArray& alpha) {
  InstantAllocationMatrix a;
  for (int j = 0; j < kNumRotors; ++j) {
    const double t = alpha[arm_of_rotor(j)];
    a.col(j) = std::sin(t) * sin_column(params, j) + std::cos(t) * cos_column(params, j);
  }
  return a;
}

UVector assemble_u(const ArmArray& alpha, const RotorArray& omega_sq) {
  UVector u;
  for (int j = 0; j < kNumRotors; ++j) {
    const double t = alpha[arm_of_rotor(j)];
    u(u_sin_index(j)) = std::sin(t) * omega_sq[j];
    u(u_cos_index(j)) = std::cos(t) * omega_sq[j];
  }
  return u;
}

AllocationPinv pseudo_inverse(const AllocationMatrix& a) {
  if (!a.allFinite()) {
    throw NumericalError("pseudo_inverse: allocation matrix is not finite");
  }
  Eigen::JacobiSVD<AllocationMatrix> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  if (!(sv(5) > kRankTol * sv(0))) {
    throw NumericalError("pseudo_inverse: allocation matrix is rank deficient");
  }
  Eigen::Matrix<double, 6, 6> s_inv = Eigen::Matrix<double, 6, 6>::Zero();
  for (int i = 0; i < 6; ++i) {
    s_inv(i, i) = 1.0 / sv(i);
  }
  return svd.matrixV().leftCols<6>() * s_inv * svd.matrixU().transpose();
}

UVector pseudo_inverse_allocate(const Wrench& w_des, const AllocationMatrix& a) {
  return pseudo_inverse(a) * w_des.to_vector();
}

ArmArray extract_tilt_angles(const UVector& u, const ArmArray& alpha_prev) {
  ArmArray alpha{};
  for (int i = 0; i < kNumArms; ++i) {
    const double s = u(u_sin_index(i)) + u(u_sin_index(i + kNumArms));
    const double c = u(u_cos_index(i)) + u(u_cos_index(i + kNumArms));
    alpha[i] = (s == 0.0 && c == 0.0) ? alpha_prev[i] : std::atan2(s, c);
  }
  return alpha;
}

RotorArray extract_rotor_speeds(const UVector& u, const ArmArray& alpha, double omega_sq_max) {
  RotorArray omega{};
  for (int j = 0; j < kNumRotors; ++j) {
    const double t = alpha[arm_of_rotor(j)];
    const double proj = std::sin(t) * u(u_sin_index(j)) + std::cos(t) * u(u_cos_index(j));
    omega[j] = std::clamp(proj, 0.0, omega_sq_max);
  }
  return omega;
}

RotorArray refine_rotor_speeds(const InstantAllocationMatrix& a_alpha, const RotorArray& omega_sq,
                               const Wrench& w_des, double omega_sq_max, double damping) {
  using Vec12 = Eigen::Matrix<double, kNumRotors, 1>;
  if (!(omega_sq_max > 0.0) || !std::isfinite(omega_sq_max) || !(damping > 0.0)) {
    throw InvalidArgument("refine_rotor_speeds: need finite omega_sq_max > 0 and damping > 0");
  }
  // Work in x = Omega / omega_sq_max so the box is [0, 1].
  const Eigen::MatrixXd m = a_alpha * omega_sq_max;
  const Eigen::VectorXd x0 = Eigen::Map<const Vec12>(omega_sq.data()) / omega_sq_max;
  const Eigen::MatrixXd h = m.transpose() * m + damping * damping * Eigen::MatrixXd::Identity(kNumRotors, kNumRotors);
  const Eigen::VectorXd c = m.transpose() * w_des.to_vector() + damping * damping * x0;
  const Eigen::VectorXd x =
      solve_box_qp(h, c, Eigen::VectorXd::Zero(kNumRotors), Eigen::VectorXd::Ones(kNumRotors), x0);

  RotorArray out{};
  for (int j = 0; j < kNumRotors; ++j) {
    out[j] = std::clamp(x(j), 0.0, 1.0) * omega_sq_max;
  }
  return out;
}

ActuatorCommand refine_command(const VehicleParams& params, const ActuatorCommand& cmd, const TiltWindow& window,
                               const Wrench& w_des, double damping, int iterations) {
  constexpr int n = kNumRotors + kNumArms;
  if (!(damping > 0.0) || iterations < 1) {
    throw InvalidArgument("refine_command: need damping > 0 and at least one iteration");
  }
  const double om_max = params.omega_sq_max;
  // y = (Omega / omega_sq_max, (alpha - alpha_cmd) / scale_i), box [lo, hi].
  Eigen::VectorXd lo(n), hi(n), scale(n), y0(n);
  for (int j = 0; j < kNumRotors; ++j) {
    lo(j) = 0.0;
    hi(j) = 1.0;
    scale(j) = om_max;
    y0(j) = std::clamp(cmd.omega_sq[j] / om_max, 0.0, 1.0);
  }
  for (int i = 0; i < kNumArms; ++i) {
    const double a = window.lower[i] - cmd.tilt[i];
    const double b = window.upper[i] - cmd.tilt[i];
    if (!(a <= 0.0 && b >= 0.0)) {
      throw InvalidArgument("refine_command: tilt window must contain the commanded tilt");
    }
    const double width = b - a;
    scale(kNumRotors + i) = width > 0.0 ? width : 1.0;
    lo(kNumRotors + i) = a / scale(kNumRotors + i);
    hi(kNumRotors + i) = b / scale(kNumRotors + i);
    y0(kNumRotors + i) = 0.0;
  }

  Eigen::VectorXd y = y0;
  ActuatorCommand out = cmd;
  const double stop = kCorrectionStop * (1.0 + w_des.to_vector().norm());
  const Vector6 target = w_des.to_vector();
  const Eigen::MatrixXd reg = damping * damping * Eigen::MatrixXd::Identity(n, n);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::MatrixXd m = derivative_allocation(params, out.tilt, out.omega_sq) * scale.asDiagonal();
    const Vector6 err = target - forward_wrench(params, out.tilt, out.omega_sq).to_vector();
    if (err.norm() <= stop) {
      break;
    }
    const Eigen::MatrixXd h = m.transpose() * m + reg;
    const Eigen::VectorXd c = m.transpose() * (err + m * y) + damping * damping * y;
    y = solve_box_qp(h, c, lo, hi, y);
    for (int j = 0; j < kNumRotors; ++j) {
      out.omega_sq[j] = std::clamp(y(j), 0.0, 1.0) * om_max;
    }
    for (int i = 0; i < kNumArms; ++i) {
      out.tilt[i] = std::clamp(cmd.tilt[i] + y(kNumRotors + i) * scale(kNumRotors + i), window.lower[i],
                               window.upper[i]);
    }
  }
  return out;
}

Wrench forward_wrench(const VehicleParams& params, const ArmArray& alpha, const RotorArray& omega_sq) {
  const Eigen::Map<const Eigen::Matrix<double, kNumRotors, 1>> om(omega_sq.data());
  return Wrench::from_vector(build_A_alpha(params, alpha) * om);
}

void AllocationOptions::validate() const {
  if (!(correction_damping > 0.0) || !std::isfinite(correction_damping)) {
    throw InvalidArgument("correction_damping must be finite and positive");
  }
  if (correction_iterations < 1) {
    throw InvalidArgument("correction_iterations must be at least 1");
  }
}

Allocator::Allocator(const VehicleParams& params, AllocationOptions options)
    : params_(params), options_(options) {
  params_.validate();
  options_.validate();
  a_ = build_A(params_);
  a_pinv_ = pseudo_inverse(a_);
}

ActuatorCommand Allocator::allocate(const Wrench& w_des, const ArmArray& alpha_prev, double dt,
                                    const SingularityParams& sing, AllocationDiagnostics* diag) const {
  if (!(dt > 0.0)) {
    throw InvalidArgument("allocate: dt must be positive");
  }
  if (!w_des.finite()) {
    throw NumericalError("allocate: desired wrench is not finite");
  }
  const UVector u = solve(w_des);
  const ArmArray alpha_des = extract_tilt_angles(u, alpha_prev);

  ArmArray delta{};
  for (int i = 0; i < kNumArms; ++i) {
    delta[i] = wrap_angle(alpha_des[i] - alpha_prev[i]);
  }

  AllocationDiagnostics d;
  d.tilt_desired = alpha_des;
  const double force_norm = w_des.force.norm();
  d.direction_valid = force_norm > 1e-6 * params_.weight() && force_norm > 0.0;
  if (d.direction_valid) {
    const Vec3 dir = w_des.force / force_norm;
    d.misalignment = z_misalignment(dir);
    for (int i = 0; i < kNumArms; ++i) {
      d.alignment[i] = arm_alignment(dir, i, params_);
    }
    if (sing.enabled) {
      d.tilt_bias_gain = tilt_bias_multiplier(d.misalignment, sing);
      for (int i = 0; i < kNumArms; ++i) {
        d.damping_gain[i] = damping_multiplier(d.alignment[i], sing);
      }
    }
  }

  if (sing.enabled && d.direction_valid) {
    delta = apply_tilt_bias(delta, d.tilt_bias_gain, sing);
    delta = apply_damping_and_unwind(delta, d.damping_gain, alpha_prev, sing, dt);
  }

  ActuatorCommand cmd;
  const double max_step = params_.tilt_rate_max * dt;
  for (int i = 0; i < kNumArms; ++i) {
    cmd.tilt[i] = limit_tilt_step(alpha_prev[i], delta[i], max_step);
  }
  cmd.omega_sq = extract_rotor_speeds(u, cmd.tilt, params_.omega_sq_max);
  if (options_.residual_correction) {
    TiltWindow window{cmd.tilt, cmd.tilt};
    if (options_.tilt_correction) {
      for (int i = 0; i < kNumArms; ++i) {
        // Rate window around alpha_prev, narrowed toward alpha_cmd as the bias or damping take over.
        const double room = (1.0 - d.tilt_bias_gain) * (1.0 - d.damping_gain[i]) * 2.0 * max_step;
        window.lower[i] = std::max(alpha_prev[i] - max_step, cmd.tilt[i] - room);
        window.upper[i] = std::min(alpha_prev[i] + max_step, cmd.tilt[i] + room);
      }
    }
    cmd = refine_command(params_, cmd, window, w_des, options_.correction_damping, options_.correction_iterations);
  }
  if (diag != nullptr) {
    *diag = d;
  }
  return cmd;
}

ActuatorCommand Allocator::allocate_converged(const Wrench& w_des, const ArmArray& alpha_prev) const {
  const UVector u = solve(w_des);
  ActuatorCommand cmd;
  cmd.tilt = extract_tilt_angles(u, alpha_prev);
  cmd.omega_sq = extract_rotor_speeds(u, cmd.tilt, std::numeric_limits<double>::infinity());
  return cmd;
}

ActuatorCommand allocate(const Wrench& w_des, const ArmArray& alpha_prev, double dt, const VehicleParams& params,
                         const SingularityParams& sing) {
  return Allocator(params).allocate(w_des, alpha_prev, dt, sing);
}

}  // namespace omnidyn
