#pragma once

/**
 * @file analysis.hpp
 * @brief Offline characterisation: force/torque envelopes, condition-number
 *        maps of the instantaneous allocation, and hover efficiency.
 *
 * Sweeps evaluate directions independently and may run on several threads
 * (set by the OMNIDYN_THREADS environment variable); output order always
 * follows the input direction order.
 */

#include "omnidyn/allocation.hpp"
#include "omnidyn/singularity.hpp"
#include "omnidyn/vehicle.hpp"

#include <iosfwd>
#include <vector>

namespace omnidyn {

struct EnvelopeSample {
  Vec3 direction{Vec3::UnitZ()};
  double radius{0.0};  // N or N m
};

struct ConditionSample {
  Vec3 direction{Vec3::UnitZ()};
  double log10_condition{0.0};  // +inf when A_alpha is rank deficient
};

struct EfficiencyRecord {
  Vec3 direction{Vec3::UnitZ()};  // body-frame hover force direction
  double power_efficiency{1.0};   // eta_P
  double wasted_force_index{1.0};  // eta_f
  double total_power{0.0};        // model units, P_i = f_i^(3/2)
};

struct PowerResult {
  double total_power{0.0};
  double efficiency{1.0};
};

/// n points on the unit sphere, golden-angle spiral from +z (first) to -z (last).
std::vector<Vec3> fibonacci_sphere(int n);

/// Number of worker threads for sweeps: OMNIDYN_THREADS if set, else hardware concurrency.
int sweep_threads();

/// Largest scale of @p unit_wrench the converged allocation can realise within omega_sq_max.
double envelope_radius(const Allocator& allocator, const Wrench& unit_wrench);

std::vector<EnvelopeSample> force_envelope(const VehicleParams& params, int n_dirs);
std::vector<EnvelopeSample> torque_envelope(const VehicleParams& params, int n_dirs);

/// sigma_max / sigma_min, or +inf when sigma_min <= 1e-12 sigma_max.
double condition_number(const InstantAllocationMatrix& a_alpha);

/// Converged tilt angles for a pure force along @p force_dir, optionally with the kinematic tilt bias.
ArmArray converged_tilt(const Allocator& allocator, const Vec3& force_dir, bool biased, const SingularityParams& sing);

std::vector<ConditionSample> condition_map(const VehicleParams& params, int n_dirs, bool biased,
                                           const SingularityParams& sing);
ConditionSample condition_at(const Allocator& allocator, const Vec3& force_dir, bool biased,
                             const SingularityParams& sing);

/// |F_b| / sum f_i. Throws InvalidArgument if sum f_i = 0 or any f_i < 0.
double wasted_force_index(const RotorArray& thrusts, const Vec3& force);

/// Total model power and p_h / p_total, with p_h the power of horizontal hover carrying @p hover_weight.
PowerResult power_efficiency(const RotorArray& thrusts, double hover_weight);
PowerResult power_efficiency(const RotorArray& thrusts, const VehicleParams& params);

EfficiencyRecord hover_efficiency(const Allocator& allocator, const Vec3& force_dir);
std::vector<EfficiencyRecord> hover_sweep(const VehicleParams& params, int n_orientations);

// CSV with a header row: dx,dy,dz,radius / dx,dy,dz,log10_cond / dx,dy,dz,eta_P,eta_f,total_power.
// Infinite condition numbers are written as "inf".
void write_envelope_csv(const std::vector<EnvelopeSample>& rows, std::ostream& out);
void write_condition_csv(const std::vector<ConditionSample>& rows, std::ostream& out);
void write_efficiency_csv(const std::vector<EfficiencyRecord>& rows, std::ostream& out);

}  // namespace omnidyn
