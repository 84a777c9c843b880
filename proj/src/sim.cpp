#include "omnidyn/sim.hpp"

#include "omnidyn/csv.hpp"
#include "omnidyn/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

namespace omnidyn {

namespace {

// Rotation R0 * rot(axis, angle * s(t/T)) rest-to-rest over [t0, t0 + T].
struct AxisSweep {
  Rotation start;
  Vec3 axis;
  double angle;
  double t0;
  double period;

  void apply(double t, TrajectorySetpoint& sp) const {
    const Blend b = quintic_blend((t - t0) / period);
    sp.attitude = start * rotation_from_axis_angle(axis, angle * b.s);
    sp.body_rate = axis * angle * b.ds / period;
  }
};

// Position p0 + delta * s(t/T) rest-to-rest over [t0, t0 + T].
struct LinearMove {
  Vec3 start;
  Vec3 delta;
  double t0;
  double period;

  void apply(double t, TrajectorySetpoint& sp) const {
    const Blend b = quintic_blend((t - t0) / period);
    sp.position = start + delta * b.s;
    sp.velocity = delta * b.ds / period;
    sp.acceleration = delta * b.dds / (period * period);
  }
};

void require_positive(double v, const char* what) {
  if (!(std::isfinite(v) && v > 0.0)) {
    throw InvalidArgument(std::string(what) + " must be positive");
  }
}

double attitude_error_deg(const SimLogRow& row) {
  return rad2deg(geodesic_angle(row.setpoint.attitude, row.state.attitude));
}

}  // namespace

TrajectorySetpoint Trajectory::at(double t) const { return sampler(std::clamp(t, 0.0, duration)); }

Blend quintic_blend(double tau) {
  if (tau <= 0.0) {
    return {0.0, 0.0, 0.0};
  }
  if (tau >= 1.0) {
    return {1.0, 0.0, 0.0};
  }
  const double t2 = tau * tau;
  const double t3 = t2 * tau;
  return {t3 * (10.0 - 15.0 * tau + 6.0 * t2), 30.0 * t2 * (1.0 - 2.0 * tau + t2), 60.0 * tau * (1.0 - 3.0 * tau + 2.0 * t2)};
}

Trajectory make_hover(double duration) {
  require_positive(duration, "hover duration");
  return {"hover", duration, [](double) { return TrajectorySetpoint{}; }, {0.0}};
}

Trajectory make_translation(double amplitude, double period) {
  require_positive(amplitude, "translation amplitude");
  require_positive(period, "translation period");
  const double half = period / 2.0;
  const LinearMove out{Vec3::Zero(), amplitude * Vec3::UnitX(), 0.0, half};
  const LinearMove back{amplitude * Vec3::UnitX(), -amplitude * Vec3::UnitX(), half, half};
  return {"translation", period,
          [=](double t) {
            TrajectorySetpoint sp;
            (t < half ? out : back).apply(t, sp);
            return sp;
          },
          {0.0, half}};
}

Trajectory make_rotation(double angle, const Vec3& axis, double period) {
  require_positive(period, "rotation period");
  const AxisSweep sweep{Rotation::identity(), axis, angle, 0.0, period};
  rotation_from_axis_angle(axis, 0.0);  // validates the axis up front
  return {"rotation", period,
          [=](double t) {
            TrajectorySetpoint sp;
            sweep.apply(t, sp);
            return sp;
          },
          {0.0}};
}

Trajectory make_flip(double period) {
  require_positive(period, "flip period");
  const AxisSweep sweep{Rotation::identity(), Vec3::UnitY(), 2.0 * kPi, 0.0, period};
  return {"flip", period,
          [=](double t) {
            TrajectorySetpoint sp;
            sweep.apply(t, sp);
            return sp;
          },
          {0.0}};
}

Trajectory make_singular_translation(const VehicleParams& params, double distance, double reorient_time,
                                     double translate_time) {
  require_positive(distance, "singular translation distance");
  require_positive(reorient_time, "singular translation reorientation time");
  require_positive(translate_time, "singular translation time");
  const double g = params.arm_azimuth[0];
  const Vec3 arm(std::cos(g), std::sin(g), 0.0);
  const Vec3 tip_axis = Vec3::UnitZ().cross(arm);  // rotating +90 deg about it sends the arm to -z
  const AxisSweep tip{Rotation::identity(), tip_axis, kPi / 2.0, 0.0, reorient_time};
  const Rotation tipped = rotation_from_axis_angle(tip_axis, kPi / 2.0);
  const LinearMove move{Vec3::Zero(), distance * Vec3::UnitX(), reorient_time, translate_time};
  return {"singular-translation", reorient_time + translate_time,
          [=](double t) {
            TrajectorySetpoint sp;
            if (t < reorient_time) {
              tip.apply(t, sp);
            } else {
              sp.attitude = tipped;
              move.apply(t, sp);
            }
            return sp;
          },
          {0.0, reorient_time}};
}

Trajectory make_cartwheel(double period, double pitch_time) {
  require_positive(period, "cartwheel period");
  require_positive(pitch_time, "cartwheel pitch time");
  const AxisSweep pitch{Rotation::identity(), Vec3::UnitY(), kPi / 2.0, 0.0, pitch_time};
  const AxisSweep wheel{rot_y(kPi / 2.0), Vec3::UnitZ(), 2.0 * kPi, pitch_time, period};
  return {"cartwheel", pitch_time + period,
          [=](double t) {
            TrajectorySetpoint sp;
            (t < pitch_time ? pitch : wheel).apply(t, sp);
            return sp;
          },
          {0.0, pitch_time}};
}

const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"translation", "rotation", "flip", "singular-translation", "cartwheel",
                                              "hover"};
  return names;
}

Trajectory make_experiment(const std::string& name, const VehicleParams& params) {
  if (name == "translation") return make_translation();
  if (name == "rotation") return make_rotation();
  if (name == "flip") return make_flip();
  if (name == "singular-translation") return make_singular_translation(params);
  if (name == "cartwheel") return make_cartwheel();
  if (name == "hover") return make_hover();
  throw InvalidArgument("unknown experiment '" + name + "'");
}

int SimConfig::substeps() const { return static_cast<int>(std::lround(dt_control / dt_physics)); }

void SimConfig::validate() const {
  require_positive(dt_physics, "dt_physics");
  require_positive(dt_control, "dt_control");
  const int n = substeps();
  if (n < 1 || std::abs(n * dt_physics - dt_control) > 1e-9 * dt_control) {
    throw InvalidArgument("dt_control must be an integer multiple of dt_physics");
  }
  if (duration) {
    require_positive(*duration, "duration");
  }
  if (!initial_position_offset.allFinite() || !disturbance.finite()) {
    throw InvalidArgument("sim config: initial offset and disturbance must be finite");
  }
}

SimLog simulate(const Trajectory& trajectory, const SimSetup& setup) {
  setup.vehicle.validate();
  setup.gains.validate();
  setup.singularity.validate();
  setup.sim.validate();

  const VehicleParams& p = setup.vehicle;
  const Allocator allocator(p, setup.allocation);
  const double dt = setup.sim.dt_control;
  const int substeps = setup.sim.substeps();
  const double h = dt / substeps;
  const double duration = setup.sim.duration.value_or(trajectory.duration);
  const auto ticks = static_cast<long>(std::lround(duration / dt));

  SimLog log;
  log.experiment = trajectory.name;
  log.rows.reserve(static_cast<std::size_t>(ticks) + 1);

  const TrajectorySetpoint sp0 = trajectory.at(0.0);
  RigidBodyState state;
  state.position = sp0.position + setup.sim.initial_position_offset;
  state.velocity = sp0.velocity;
  state.attitude = sp0.attitude;
  state.body_rate = sp0.body_rate;
  ArmArray tilt{};

  for (long k = 0; k <= ticks; ++k) {
    const double t = k * dt;
    SimLogRow row;
    row.t = t;
    row.state = state;
    row.setpoint = trajectory.at(t);
    row.errors = compute_errors(state, row.setpoint);
    row.wrench = control_wrench(row.errors, state, row.setpoint, setup.gains, p);
    if (!row.wrench.finite()) {
      throw SimulationError("simulate: non-finite control wrench at t=" + std::to_string(t), std::move(log));
    }
    AllocationDiagnostics diag;
    row.command = allocator.allocate(row.wrench, tilt, dt, setup.singularity, &diag);
    row.tilt_bias_gain = diag.tilt_bias_gain;
    row.damping_gain = diag.damping_gain;

    const Wrench thrust = forward_wrench(p, row.command.tilt, row.command.omega_sq);
    double thrust_sum = 0.0;
    for (double om : row.command.omega_sq) {
      thrust_sum += rotor_thrust(om, p.thrust_coeff);
    }
    row.wasted_force_index =
        thrust_sum > 0.0 ? thrust.force.norm() / thrust_sum : std::numeric_limits<double>::quiet_NaN();
    tilt = row.command.tilt;
    log.rows.push_back(row);

    if (k == ticks) {
      break;
    }
    const Wrench applied = Wrench::from_vector(thrust.to_vector() + setup.sim.disturbance.to_vector());
    const WrenchFn hold = [&applied](double) { return applied; };
    try {
      for (int s = 0; s < substeps; ++s) {
        state = integrate_step(state, t + s * h, hold, h, p);
      }
    } catch (const NumericalError& e) {
      throw SimulationError(e.what(), std::move(log));
    }
  }
  return log;
}

TrackingSummary tracking_summary(const SimLog& log) {
  if (log.rows.empty()) {
    throw InvalidArgument("tracking_summary: empty log");
  }
  TrackingSummary s;
  double pos_sq = 0.0;
  double att_sq = 0.0;
  s.min_wasted_force_index = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const SimLogRow& row = log.rows[k];
    const double ep = row.errors.position.norm();
    const double ea = attitude_error_deg(row);
    s.max_position_error = std::max(s.max_position_error, ep);
    s.max_attitude_error_deg = std::max(s.max_attitude_error_deg, ea);
    pos_sq += ep * ep;
    att_sq += ea * ea;
    if (!std::isnan(row.wasted_force_index)) {
      s.min_wasted_force_index = std::min(s.min_wasted_force_index, row.wasted_force_index);
    }
    if (k > 0) {
      const SimLogRow& prev = log.rows[k - 1];
      const double step = row.t - prev.t;
      for (int i = 0; i < kNumArms; ++i) {
        s.max_tilt_rate = std::max(s.max_tilt_rate, std::abs(row.command.tilt[i] - prev.command.tilt[i]) / step);
      }
    }
  }
  const auto n = static_cast<double>(log.rows.size());
  s.rms_position_error = std::sqrt(pos_sq / n);
  s.rms_attitude_error_deg = std::sqrt(att_sq / n);
  if (std::isinf(s.min_wasted_force_index)) {
    s.min_wasted_force_index = std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

const std::vector<std::string>& log_columns() {
  static const std::vector<std::string> cols = [] {
    std::vector<std::string> c{"t"};
    auto vec = [&c](const std::string& prefix) {
      for (const char* axis : {"x", "y", "z"}) {
        c.push_back(prefix + "_" + axis);
      }
    };
    auto mat = [&c](const std::string& prefix) {
      for (int r = 0; r < 3; ++r) {
        for (int col = 0; col < 3; ++col) {
          c.push_back(prefix + "_" + std::to_string(r) + std::to_string(col));
        }
      }
    };
    vec("pos");
    vec("vel");
    mat("R");
    vec("omega");
    vec("sp_pos");
    vec("sp_vel");
    vec("sp_acc");
    mat("sp_R");
    vec("sp_omega");
    vec("e_p");
    vec("e_v");
    vec("e_R");
    vec("e_omega");
    vec("F_cmd");
    vec("tau_cmd");
    for (int i = 1; i <= kNumArms; ++i) c.push_back("alpha_" + std::to_string(i));
    for (int j = 1; j <= kNumRotors; ++j) c.push_back("Omega_" + std::to_string(j));
    c.push_back("eta_f");
    c.push_back("k_t");
    for (int i = 1; i <= kNumArms; ++i) c.push_back("k_alpha_" + std::to_string(i));
    return c;
  }();
  return cols;
}

void write_log_csv(const SimLog& log, std::ostream& out) {
  out << "# " << kLogFormat << " experiment=" << log.experiment << '\n';
  CsvWriter csv(out);
  for (const auto& c : log_columns()) {
    csv << c;
  }
  csv.end_row();
  auto vec = [&csv](const Vec3& v) { csv << v.x() << v.y() << v.z(); };
  auto mat = [&csv](const Rotation& r) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        csv << r(i, j);
      }
    }
  };
  for (const SimLogRow& row : log.rows) {
    csv << row.t;
    vec(row.state.position);
    vec(row.state.velocity);
    mat(row.state.attitude);
    vec(row.state.body_rate);
    vec(row.setpoint.position);
    vec(row.setpoint.velocity);
    vec(row.setpoint.acceleration);
    mat(row.setpoint.attitude);
    vec(row.setpoint.body_rate);
    vec(row.errors.position);
    vec(row.errors.velocity);
    vec(row.errors.attitude);
    vec(row.errors.angular_rate);
    vec(row.wrench.force);
    vec(row.wrench.torque);
    for (double a : row.command.tilt) csv << a;
    for (double om : row.command.omega_sq) csv << om;
    csv << row.wasted_force_index << row.tilt_bias_gain;
    for (double k : row.damping_gain) csv << k;
    csv.end_row();
  }
}

}  // namespace omnidyn
