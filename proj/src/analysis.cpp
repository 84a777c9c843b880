#include "omnidyn/analysis.hpp"

#include "omnidyn/csv.hpp"
#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <ostream>
#include <string>
#include <thread>

namespace omnidyn {

namespace {

constexpr double kRankDeficientTol = 1e-12;

template <typename Out, typename Fn>
std::vector<Out> parallel_map(const std::vector<Vec3>& dirs, Fn fn) {
  std::vector<Out> out(dirs.size());
  const int n = static_cast<int>(dirs.size());
  const int threads = std::clamp(sweep_threads(), 1, std::max(1, n));
  auto work = [&](int begin) {
    for (int k = begin; k < n; k += threads) {
      out[k] = fn(dirs[k]);
    }
  };
  if (threads == 1) {
    work(0);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back(work, t);
  }
  for (auto& th : pool) {
    th.join();
  }
  return out;
}

void header(CsvWriter& csv, std::initializer_list<const char*> names) {
  for (const char* n : names) {
    csv << std::string(n);
  }
  csv.end_row();
}

void direction(CsvWriter& csv, const Vec3& d) { csv << d.x() << d.y() << d.z(); }

void require_count(int n) {
  if (n < 1) {
    throw InvalidArgument("direction count must be at least 1");
  }
}

}  // namespace

std::vector<Vec3> fibonacci_sphere(int n) {
  require_count(n);
  if (n == 1) {
    return {Vec3::UnitZ()};
  }
  const double golden = kPi * (3.0 - std::sqrt(5.0));
  std::vector<Vec3> dirs;
  dirs.reserve(n);
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - 2.0 * k / (n - 1);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double th = golden * k;
    dirs.emplace_back(r * std::cos(th), r * std::sin(th), z);
  }
  return dirs;
}

int sweep_threads() {
  if (const char* env = std::getenv("OMNIDYN_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) {
      return n;
    }
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

double envelope_radius(const Allocator& allocator, const Wrench& unit_wrench) {
  const ActuatorCommand cmd = allocator.allocate_converged(unit_wrench);
  const double peak = *std::max_element(cmd.omega_sq.begin(), cmd.omega_sq.end());
  return peak > 0.0 ? allocator.params().omega_sq_max / peak : 0.0;
}

std::vector<EnvelopeSample> force_envelope(const VehicleParams& params, int n_dirs) {
  const Allocator allocator(params);
  return parallel_map<EnvelopeSample>(fibonacci_sphere(n_dirs), [&](const Vec3& d) {
    return EnvelopeSample{d, envelope_radius(allocator, Wrench{d, Vec3::Zero()})};
  });
}

std::vector<EnvelopeSample> torque_envelope(const VehicleParams& params, int n_dirs) {
  const Allocator allocator(params);
  return parallel_map<EnvelopeSample>(fibonacci_sphere(n_dirs), [&](const Vec3& d) {
    return EnvelopeSample{d, envelope_radius(allocator, Wrench{Vec3::Zero(), d})};
  });
}

double condition_number(const InstantAllocationMatrix& a_alpha) {
  Eigen::JacobiSVD<InstantAllocationMatrix> svd(a_alpha);
  const auto& sv = svd.singularValues();
  if (!(sv(5) > kRankDeficientTol * sv(0))) {
    return std::numeric_limits<double>::infinity();
  }
  return sv(0) / sv(5);
}

ArmArray converged_tilt(const Allocator& allocator, const Vec3& force_dir, bool biased,
                        const SingularityParams& sing) {
  ArmArray alpha = allocator.allocate_converged(Wrench{force_dir, Vec3::Zero()}).tilt;
  if (biased) {
    const double k_t = tilt_bias_multiplier(z_misalignment(force_dir), sing);
    for (int i = 0; i < kNumArms; ++i) {
      alpha[i] += k_t * sing.bias_direction[i] * sing.bias_magnitude;
    }
  }
  return alpha;
}

ConditionSample condition_at(const Allocator& allocator, const Vec3& force_dir, bool biased,
                             const SingularityParams& sing) {
  const ArmArray alpha = converged_tilt(allocator, force_dir, biased, sing);
  return {force_dir, std::log10(condition_number(build_A_alpha(allocator.params(), alpha)))};
}

std::vector<ConditionSample> condition_map(const VehicleParams& params, int n_dirs, bool biased,
                                           const SingularityParams& sing) {
  const Allocator allocator(params);
  return parallel_map<ConditionSample>(fibonacci_sphere(n_dirs),
                                       [&](const Vec3& d) { return condition_at(allocator, d, biased, sing); });
}

double wasted_force_index(const RotorArray& thrusts, const Vec3& force) {
  double sum = 0.0;
  for (double f : thrusts) {
    if (!(f >= 0.0)) {
      throw InvalidArgument("wasted_force_index: rotor thrusts must be non-negative");
    }
    sum += f;
  }
  if (sum == 0.0) {
    throw InvalidArgument("wasted_force_index: undefined for zero total thrust");
  }
  return force.norm() / sum;
}

PowerResult power_efficiency(const RotorArray& thrusts, double hover_weight) {
  PowerResult r;
  for (double f : thrusts) {
    if (!(f >= 0.0)) {
      throw InvalidArgument("power_efficiency: rotor thrusts must be non-negative");
    }
    r.total_power += std::pow(f, 1.5);
  }
  const double p_hover = kNumRotors * std::pow(hover_weight / kNumRotors, 1.5);
  r.efficiency = r.total_power > 0.0 ? p_hover / r.total_power : 1.0;
  return r;
}

PowerResult power_efficiency(const RotorArray& thrusts, const VehicleParams& params) {
  return power_efficiency(thrusts, params.weight());
}

EfficiencyRecord hover_efficiency(const Allocator& allocator, const Vec3& force_dir) {
  const VehicleParams& p = allocator.params();
  const Wrench hover{p.weight() * force_dir.normalized(), Vec3::Zero()};
  const ActuatorCommand cmd = allocator.allocate_converged(hover);
  RotorArray thrust{};
  for (int j = 0; j < kNumRotors; ++j) {
    thrust[j] = rotor_thrust(cmd.omega_sq[j], p.thrust_coeff);
  }
  const Wrench produced = forward_wrench(p, cmd.tilt, cmd.omega_sq);
  const PowerResult power = power_efficiency(thrust, p);
  return {force_dir, power.efficiency, wasted_force_index(thrust, produced.force), power.total_power};
}

std::vector<EfficiencyRecord> hover_sweep(const VehicleParams& params, int n_orientations) {
  const Allocator allocator(params);
  return parallel_map<EfficiencyRecord>(fibonacci_sphere(n_orientations),
                                        [&](const Vec3& d) { return hover_efficiency(allocator, d); });
}

void write_envelope_csv(const std::vector<EnvelopeSample>& rows, std::ostream& out) {
  CsvWriter csv(out);
  header(csv, {"dx", "dy", "dz", "radius"});
  for (const auto& r : rows) {
    direction(csv, r.direction);
    csv << r.radius;
    csv.end_row();
  }
}

void write_condition_csv(const std::vector<ConditionSample>& rows, std::ostream& out) {
  CsvWriter csv(out);
  header(csv, {"dx", "dy", "dz", "log10_cond"});
  for (const auto& r : rows) {
    direction(csv, r.direction);
    csv << r.log10_condition;
    csv.end_row();
  }
}

void write_efficiency_csv(const std::vector<EfficiencyRecord>& rows, std::ostream& out) {
  CsvWriter csv(out);
  header(csv, {"dx", "dy", "dz", "eta_P", "eta_f", "total_power"});
  for (const auto& r : rows) {
    direction(csv, r.direction);
    csv << r.power_efficiency << r.wasted_force_index << r.total_power;
    csv.end_row();
  }
}

}  // namespace omnidyn
