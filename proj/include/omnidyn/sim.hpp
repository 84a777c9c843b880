#pragma once

/**
 * @file sim.hpp
 * @brief Closed-loop simulation: trajectory library, fixed-step driver and logs.
 *
 * The controller and allocation run at dt_control with zero-order hold of the
 * actuator command; the plant is integrated with RK4 at dt_physics. The
 * controller sees the true state. Runs are deterministic.
 */

#include "omnidyn/allocation.hpp"
#include "omnidyn/controller.hpp"
#include "omnidyn/errors.hpp"
#include "omnidyn/singularity.hpp"
#include "omnidyn/vehicle.hpp"

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace omnidyn {

struct Trajectory {
  std::string name;
  double duration{0.0};
  std::function<TrajectorySetpoint(double)> sampler;
  std::vector<double> phase_starts{0.0};  // start time of each phase

  /// Setpoint at @p t, clamped to [0, duration].
  TrajectorySetpoint at(double t) const;
};

/// Rest-to-rest quintic blend s(tau) = 10 tau^3 - 15 tau^4 + 6 tau^5 and its derivatives, tau in [0, 1].
struct Blend {
  double s, ds, dds;
};
Blend quintic_blend(double tau);

Trajectory make_hover(double duration = 10.0);
/// Out along inertial x by @p amplitude in period/2, back in period/2.
Trajectory make_translation(double amplitude = 2.0, double period = 8.0);
/// Single sweep from identity to @p angle about the body @p axis.
Trajectory make_rotation(double angle = kPi / 2.0, const Vec3& axis = Vec3::UnitX(), double period = 6.0);
/// Full turn about body y.
Trajectory make_flip(double period = 6.0);
/// Tip arm 1 down onto inertial -z, then translate along inertial x holding that attitude.
Trajectory make_singular_translation(const VehicleParams& params, double distance = 1.0, double reorient_time = 4.0,
                                     double translate_time = 6.0);
/// Pitch to 90 deg, then one full turn about body z.
Trajectory make_cartwheel(double period = 12.0, double pitch_time = 4.0);

const std::vector<std::string>& experiment_names();
/// Throws InvalidArgument for unknown names.
Trajectory make_experiment(const std::string& name, const VehicleParams& params);

struct SimConfig {
  double dt_physics{1e-3};
  double dt_control{5e-3};
  std::optional<double> duration;      // overrides the trajectory duration
  Vec3 initial_position_offset{Vec3::Zero()};  // added to the first setpoint
  Wrench disturbance{};                // constant body-frame wrench added to the thrust

  int substeps() const;
  void validate() const;
};

struct SimSetup {
  VehicleParams vehicle{default_params()};
  Gains gains{};
  SingularityParams singularity{};
  AllocationOptions allocation{};
  SimConfig sim{};
};

struct SimLogRow {
  double t{0.0};
  RigidBodyState state{};
  TrajectorySetpoint setpoint{};
  ControlErrors errors{};
  Wrench wrench{};                 // commanded body wrench
  ActuatorCommand command{};
  double wasted_force_index{0.0};  // NaN when no rotor produces thrust
  double tilt_bias_gain{0.0};
  ArmArray damping_gain{};
};

struct SimLog {
  std::string experiment;
  std::vector<SimLogRow> rows;
};

/// Thrown on a non-finite state; carries every row logged before the failure.
class SimulationError : public NumericalError {
 public:
  SimulationError(const std::string& what, SimLog partial) : NumericalError(what), log_(std::move(partial)) {}
  const SimLog& partial_log() const { return log_; }

 private:
  SimLog log_;
};

SimLog simulate(const Trajectory& trajectory, const SimSetup& setup);

struct TrackingSummary {
  double max_position_error{0.0};  // m
  double rms_position_error{0.0};
  double max_attitude_error_deg{0.0};
  double rms_attitude_error_deg{0.0};
  double max_tilt_rate{0.0};  // rad/s, between consecutive rows
  double min_wasted_force_index{0.0};
};

/// Throws InvalidArgument on an empty log.
TrackingSummary tracking_summary(const SimLog& log);

/// Column names of the log CSV, in order.
const std::vector<std::string>& log_columns();
inline constexpr const char* kLogFormat = "omnidyn-simlog/1";

void write_log_csv(const SimLog& log, std::ostream& out);

}  // namespace omnidyn
