#include "omnidyn/errors.hpp"
#include "omnidyn/sim.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace omnidyn;

namespace {

const VehicleParams kParams = default_params();

// Body rate from central differences of the attitude: hat(w) ~ R^T dR/dt.
Vec3 fd_body_rate(const Trajectory& traj, double t, double h = 1e-5) {
  const Mat3 r = traj.at(t).attitude.matrix();
  const Mat3 dr = (traj.at(t + h).attitude.matrix() - traj.at(t - h).attitude.matrix()) / (2.0 * h);
  const Mat3 w = r.transpose() * dr;
  return 0.5 * Vec3(w(2, 1) - w(1, 2), w(0, 2) - w(2, 0), w(1, 0) - w(0, 1));
}

void expect_consistent_derivatives(const Trajectory& traj) {
  const double h = 1e-5;
  for (double t = 0.05; t < traj.duration - 0.05; t += 0.173) {
    const TrajectorySetpoint sp = traj.at(t);
    const Vec3 v = (traj.at(t + h).position - traj.at(t - h).position) / (2.0 * h);
    const Vec3 a = (traj.at(t + h).velocity - traj.at(t - h).velocity) / (2.0 * h);
    EXPECT_LT((v - sp.velocity).norm(), 1e-6) << traj.name << " t = " << t;
    EXPECT_LT((a - sp.acceleration).norm(), 1e-6) << traj.name << " t = " << t;
    // Body rate is stored in the setpoint body frame.
    EXPECT_LT((fd_body_rate(traj, t) - sp.body_rate).norm(), 1e-6) << traj.name << " t = " << t;
  }
}

Vec3 reference_force_dir(const TrajectorySetpoint& sp) {
  return (sp.attitude.transpose() * (sp.acceleration + Vec3(0.0, 0.0, kParams.gravity))).normalized();
}

}  // namespace

TEST(Blend, Quintic) {
  const Blend b0 = quintic_blend(0.0);
  const Blend b1 = quintic_blend(1.0);
  EXPECT_EQ(b0.s, 0.0);
  EXPECT_EQ(b1.s, 1.0);
  EXPECT_EQ(b0.ds + b0.dds + b1.ds + b1.dds, 0.0);
  const Blend mid = quintic_blend(0.5);
  EXPECT_DOUBLE_EQ(mid.s, 0.5);
  EXPECT_DOUBLE_EQ(mid.ds, 15.0 / 8.0);
  EXPECT_NEAR(mid.dds, 0.0, 1e-15);
  EXPECT_EQ(quintic_blend(-1.0).s, 0.0);
  EXPECT_EQ(quintic_blend(2.0).s, 1.0);
  const double h = 1e-6;
  for (double tau = 0.05; tau < 1.0; tau += 0.1) {
    EXPECT_NEAR((quintic_blend(tau + h).s - quintic_blend(tau - h).s) / (2 * h), quintic_blend(tau).ds, 1e-8);
    EXPECT_NEAR((quintic_blend(tau + h).ds - quintic_blend(tau - h).ds) / (2 * h), quintic_blend(tau).dds, 1e-7);
  }
}

TEST(Trajectories, TranslationShape) {
  const Trajectory t = make_translation(2.0, 8.0);
  EXPECT_EQ(t.duration, 8.0);
  EXPECT_EQ(t.at(0.0).position, Vec3::Zero());
  EXPECT_LT((t.at(4.0).position - Vec3(2.0, 0.0, 0.0)).norm(), 1e-15);
  EXPECT_LT(t.at(8.0).position.norm(), 1e-15);
  EXPECT_NEAR(t.at(2.0).velocity.x(), 15.0 / 8.0 * 2.0 / 4.0, 1e-12);
  expect_consistent_derivatives(t);
}

TEST(Trajectories, RotationShape) {
  const Trajectory t = make_rotation();
  EXPECT_NEAR(geodesic_angle(t.at(t.duration).attitude, rot_x(kPi / 2.0)), 0.0, 1e-12);
  expect_consistent_derivatives(t);
  EXPECT_THROW(make_rotation(1.0, Vec3(1, 1, 0)), InvalidArgument);
}

TEST(Trajectories, FlipCompletesOneTurn) {
  const Trajectory t = make_flip();
  EXPECT_NEAR(geodesic_angle(t.at(0.0).attitude, t.at(t.duration).attitude), 0.0, 1e-9);
  EXPECT_NEAR(geodesic_angle(t.at(0.0).attitude, t.at(t.duration / 2.0).attitude), kPi, 1e-6);
  expect_consistent_derivatives(t);
  // Simpson quadrature of the pitch rate over the period.
  const int n = 600;
  const double h = t.duration / n;
  double sum = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    sum += w * t.at(k * h).body_rate.y();
  }
  EXPECT_NEAR(sum * h / 3.0, 2.0 * kPi, 1e-9);
}

TEST(Trajectories, SingularTranslation) {
  const Trajectory t = make_singular_translation(kParams);
  ASSERT_EQ(t.phase_starts.size(), 2u);
  const double t1 = t.phase_starts[1];
  const TrajectorySetpoint start = t.at(0.0);
  EXPECT_EQ(start.velocity, Vec3::Zero());
  EXPECT_EQ(start.body_rate, Vec3::Zero());
  // Arm 1 points straight down once tipped, so the hover force lies along its line.
  const Vec3 arm1 = t.at(t1).attitude * Vec3::UnitX();
  EXPECT_LT((arm1 + Vec3::UnitZ()).norm(), 1e-12);
  EXPECT_NEAR(arm_alignment(reference_force_dir(t.at(t1)), 0, kParams), 0.0, 1e-7);
  for (double s = t1; s <= t.duration; s += 0.5) {
    EXPECT_NEAR(geodesic_angle(t.at(s).attitude, t.at(t1).attitude), 0.0, 1e-12);
  }
  EXPECT_LT((t.at(t.duration).position - Vec3(1.0, 0.0, 0.0)).norm(), 1e-12);
  expect_consistent_derivatives(t);
}

TEST(Trajectories, CartwheelCrossesEveryArmLine) {
  const Trajectory t = make_cartwheel();
  ASSERT_EQ(t.phase_starts.size(), 2u);
  const double t1 = t.phase_starts[1];
  EXPECT_NEAR(geodesic_angle(t.at(t1).attitude, t.at(t.duration).attitude), 0.0, 1e-9);
  expect_consistent_derivatives(t);

  // During the wheel the reference force stays in the body plane and sweeps through
  // each of the three arm lines twice. The last approach closes onto the first line at the end.
  const double dt = 1e-4;
  std::vector<double> crossings;
  double episode_min = 10.0;
  double episode_at = 0.0;
  bool inside = false;
  for (double s = t1; s <= t.duration + dt / 2.0; s += dt) {
    const Vec3 f = reference_force_dir(t.at(s));
    EXPECT_LT(std::abs(f.z()), 1e-9);
    double best = 10.0;
    for (int i = 0; i < 3; ++i) {
      best = std::min(best, arm_alignment(f, i, kParams));
    }
    if (best < 1e-3) {
      if (!inside || best < episode_min) {
        episode_min = best;
        episode_at = s;
      }
      inside = true;
    } else if (inside) {
      crossings.push_back(episode_at);
      inside = false;
    }
  }
  if (inside) {
    crossings.push_back(episode_at);
  }
  ASSERT_EQ(crossings.size(), 7u);
  EXPECT_NEAR(crossings.front(), t1, 1e-9);
  EXPECT_NEAR(crossings.back(), t.duration, 1e-3);
  crossings.pop_back();
  EXPECT_EQ(crossings.size(), 6u);
}

TEST(Trajectories, ExperimentNames) {
  const auto& names = experiment_names();
  EXPECT_EQ(names.size(), 6u);
  for (const auto& n : names) {
    const Trajectory t = make_experiment(n, kParams);
    EXPECT_EQ(t.name, n);
    EXPECT_GT(t.duration, 0.0);
  }
  EXPECT_THROW(make_experiment("loop", kParams), InvalidArgument);
}

TEST(Simulate, HoverStaysPut) {
  const SimLog log = simulate(make_hover(2.0), SimSetup{});
  const TrackingSummary s = tracking_summary(log);
  EXPECT_LT(s.max_position_error, 1e-6);
  EXPECT_LT(s.max_attitude_error_deg, 1e-6);
}

TEST(Simulate, RowCountAndTimeBase) {
  SimSetup setup;
  const SimLog log = simulate(make_translation(), setup);
  EXPECT_EQ(log.rows.size(), static_cast<std::size_t>(8.0 / setup.sim.dt_control) + 1);
  for (std::size_t k = 1; k < log.rows.size(); ++k) {
    EXPECT_GT(log.rows[k].t, log.rows[k - 1].t);
  }
  EXPECT_NEAR(log.rows.back().t, 8.0, 1e-12);

  setup.sim.duration = 1.0;
  EXPECT_EQ(simulate(make_translation(), setup).rows.size(), 201u);
}

TEST(Simulate, TranslationWithinFlightBounds) {
  const TrackingSummary s = tracking_summary(simulate(make_translation(), SimSetup{}));
  EXPECT_LT(s.max_position_error, 0.05);
  EXPECT_LT(s.max_attitude_error_deg, 4.0);
}

TEST(Simulate, CartwheelRespectsActuatorLimits) {
  const SimSetup setup;
  const SimLog log = simulate(make_cartwheel(), setup);
  const double step = kParams.tilt_rate_max * setup.sim.dt_control;
  for (std::size_t k = 0; k < log.rows.size(); ++k) {
    const auto& row = log.rows[k];
    ASSERT_TRUE(row.state.finite());
    for (double om : row.command.omega_sq) {
      EXPECT_GE(om, 0.0);
      EXPECT_LE(om, kParams.omega_sq_max);
    }
    if (k > 0) {
      for (int i = 0; i < kNumArms; ++i) {
        EXPECT_LE(std::abs(row.command.tilt[i] - log.rows[k - 1].command.tilt[i]), step + 1e-12);
      }
    }
  }
}

TEST(Simulate, FrozenArmOnlyUnwinds) {
  const SimSetup setup;
  const SimLog log = simulate(make_singular_translation(kParams), setup);
  const double unwind = setup.singularity.unwind_rate * setup.sim.dt_control;
  const double step = std::min(unwind, kParams.tilt_rate_max * setup.sim.dt_control);
  int frozen = 0;
  for (std::size_t k = 1; k < log.rows.size(); ++k) {
    const auto& row = log.rows[k];
    if (row.damping_gain[0] < 1.0) {
      continue;
    }
    ++frozen;
    const double prev = log.rows[k - 1].command.tilt[0];
    const double expect = std::abs(prev) <= step ? 0.0 : prev - sign(prev) * step;
    EXPECT_NEAR(row.command.tilt[0], expect, 1e-12) << "t = " << row.t;
  }
  EXPECT_GT(frozen, 100);
}

TEST(Simulate, Deterministic) {
  const SimLog a = simulate(make_flip(), SimSetup{});
  const SimLog b = simulate(make_flip(), SimSetup{});
  std::ostringstream sa, sb;
  write_log_csv(a, sa);
  write_log_csv(b, sb);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Simulate, ValidatesSetup) {
  SimSetup setup;
  setup.sim.dt_control = 0.0045;
  EXPECT_THROW(simulate(make_hover(1.0), setup), InvalidArgument);
  setup = SimSetup{};
  setup.gains.position = -1.0;
  EXPECT_THROW(simulate(make_hover(1.0), setup), InvalidArgument);
}

TEST(Simulate, BlowUpKeepsPartialLog) {
  SimSetup setup;
  setup.sim.disturbance.torque = Vec3(1e300, 0.0, 0.0);
  try {
    simulate(make_hover(1.0), setup);
    FAIL() << "expected a simulation error";
  } catch (const SimulationError& e) {
    EXPECT_FALSE(e.partial_log().rows.empty());
    for (const auto& row : e.partial_log().rows) {
      EXPECT_TRUE(row.state.finite());
    }
  }
}

TEST(Summary, Values) {
  SimLog log;
  SimLogRow r0, r1;
  r1.t = 0.5;
  r1.errors.position = Vec3(0.3, 0.4, 0.0);
  r1.state.attitude = rot_z(deg2rad(2.0));
  r1.command.tilt[2] = 1.0;
  r0.wasted_force_index = 0.9;
  r1.wasted_force_index = 0.7;
  log.rows = {r0, r1};
  const TrackingSummary s = tracking_summary(log);
  EXPECT_DOUBLE_EQ(s.max_position_error, 0.5);
  EXPECT_DOUBLE_EQ(s.rms_position_error, std::sqrt(0.125));
  EXPECT_NEAR(s.max_attitude_error_deg, 2.0, 1e-12);
  EXPECT_DOUBLE_EQ(s.max_tilt_rate, 2.0);
  EXPECT_DOUBLE_EQ(s.min_wasted_force_index, 0.7);
  EXPECT_THROW(tracking_summary(SimLog{}), InvalidArgument);
}

TEST(LogCsv, HeaderAndRows) {
  SimSetup setup;
  setup.sim.duration = 0.1;
  const SimLog log = simulate(make_hover(), setup);
  std::ostringstream out;
  write_log_csv(log, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_NE(line.find(kLogFormat), std::string::npos);
  std::getline(in, line);
  std::string expect;
  for (const auto& c : log_columns()) {
    expect += (expect.empty() ? "" : ",") + c;
  }
  EXPECT_EQ(line, expect);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(static_cast<std::size_t>(std::count(line.begin(), line.end(), ',')) + 1, log_columns().size());
  }
  EXPECT_EQ(rows, 21);
  const std::set<std::string> cols(log_columns().begin(), log_columns().end());
  EXPECT_EQ(cols.size(), log_columns().size());
}
