// omnidyn: run tracking experiments and offline allocation analyses, writing CSV/JSON artifacts.
//
//   omnidyn simulate [NAME] [--experiment NAME] [--config PATH] [--out DIR]
//   omnidyn envelope   [--n-dirs N] [--config PATH] [--out DIR]
//   omnidyn condmap    [--n-dirs N] [--biased] [--config PATH] [--out DIR]
//   omnidyn efficiency [--n-dirs N] [--config PATH] [--out DIR]
//
// Exit codes: 0 success, 1 usage, 2 config, 3 numerical failure.

#include "omnidyn/analysis.hpp"
#include "omnidyn/config.hpp"
#include "omnidyn/errors.hpp"
#include "omnidyn/sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace omnidyn;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3 };

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::string> out;
  std::optional<int> n_dirs;
  bool biased{false};
  std::string experiment;
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    throw ConfigError("cannot write " + path.string());
  }
}

template <typename Fn>
void write_stream(const fs::path& path, Fn fill) {
  std::ofstream f(path, std::ios::binary);
  fill(f);
  if (!f) {
    throw ConfigError("cannot write " + path.string());
  }
}

RunConfig resolve(const Options& opt) {
  RunConfig cfg = opt.config_path.empty() ? RunConfig{} : load_run_config(opt.config_path);
  if (opt.out) {
    cfg.output_dir = *opt.out;
  }
  if (opt.n_dirs) {
    cfg.n_dirs = *opt.n_dirs;
  }
  if (opt.biased) {
    cfg.biased = true;
  }
  if (!opt.experiment.empty()) {
    cfg.experiment = opt.experiment;
  }
  cfg.validate();
  return cfg;
}

fs::path prepare_output(const RunConfig& cfg) {
  const fs::path out(cfg.output_dir);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) {
    throw ConfigError("cannot create output directory " + out.string() + ": " + ec.message());
  }
  write_file(out / "effective_config.json", dump_run_config(cfg));
  return out;
}

std::string summary_json(const std::string& name, const TrackingSummary& s) {
  nlohmann::ordered_json j;
  j["experiment"] = name;
  j["max_pos_err"] = s.max_position_error;
  j["rms_pos_err"] = s.rms_position_error;
  j["max_att_err_deg"] = s.max_attitude_error_deg;
  j["rms_att_err_deg"] = s.rms_attitude_error_deg;
  j["max_tilt_rate"] = s.max_tilt_rate;
  j["min_eta_f"] = s.min_wasted_force_index;
  return j.dump(2) + "\n";
}

int cmd_simulate(const RunConfig& cfg) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), cfg.experiment) == names.end()) {
    std::string list;
    for (const auto& n : names) {
      list += (list.empty() ? "" : ", ") + n;
    }
    throw UsageError("unknown experiment '" + cfg.experiment + "' (expected one of: " + list + ")");
  }
  const Trajectory traj = make_experiment(cfg.experiment, cfg.setup.vehicle);
  const fs::path out = prepare_output(cfg);
  const fs::path log_path = out / (cfg.experiment + "_log.csv");

  SimLog log;
  try {
    log = simulate(traj, cfg.setup);
  } catch (const SimulationError& e) {
    std::ofstream f(log_path, std::ios::binary);
    write_log_csv(e.partial_log(), f);
    throw;
  }
  write_stream(log_path, [&](std::ostream& f) { write_log_csv(log, f); });
  const TrackingSummary s = tracking_summary(log);
  write_file(out / (cfg.experiment + "_summary.json"), summary_json(cfg.experiment, s));
  std::cout << cfg.experiment << ": max position error " << s.max_position_error << " m, max attitude error "
            << s.max_attitude_error_deg << " deg\n";
  return kOk;
}

int cmd_envelope(const RunConfig& cfg) {
  const fs::path out = prepare_output(cfg);
  const auto force = force_envelope(cfg.setup.vehicle, cfg.n_dirs);
  const auto torque = torque_envelope(cfg.setup.vehicle, cfg.n_dirs);
  write_stream(out / "force_envelope.csv", [&](std::ostream& f) { write_envelope_csv(force, f); });
  write_stream(out / "torque_envelope.csv", [&](std::ostream& f) { write_envelope_csv(torque, f); });
  return kOk;
}

int cmd_condmap(const RunConfig& cfg) {
  const fs::path out = prepare_output(cfg);
  const auto rows = condition_map(cfg.setup.vehicle, cfg.n_dirs, cfg.biased, cfg.setup.singularity);
  write_stream(out / (cfg.biased ? "condmap_biased.csv" : "condmap_unbiased.csv"),
               [&](std::ostream& f) { write_condition_csv(rows, f); });
  return kOk;
}

int cmd_efficiency(const RunConfig& cfg) {
  const fs::path out = prepare_output(cfg);
  const auto rows = hover_sweep(cfg.setup.vehicle, cfg.n_dirs);
  write_stream(out / "efficiency.csv", [&](std::ostream& f) { write_efficiency_csv(rows, f); });
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Omnidirectional tilt-rotor MAV: tracking simulation and allocation analysis"};
  app.require_subcommand(1);
  Options opt;

  auto common = [&opt](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option_function<std::string>("--out", [&opt](const std::string& v) { opt.out = v; },
                                          "Output directory (default from config, else ./out)");
  };
  auto n_dirs = [&opt](CLI::App* sub, const char* help) {
    sub->add_option_function<int>("--n-dirs", [&opt](int v) { opt.n_dirs = v; }, help)
        ->check(CLI::PositiveNumber);
  };

  CLI::App* sim = app.add_subcommand("simulate", "Closed-loop tracking run");
  common(sim);
  std::string positional;
  sim->add_option("name", positional, "Experiment name");
  sim->add_option("--experiment", opt.experiment, "Experiment name");

  CLI::App* env = app.add_subcommand("envelope", "Force and torque envelopes");
  common(env);
  n_dirs(env, "Number of sampled directions");

  CLI::App* cond = app.add_subcommand("condmap", "Condition number of the instantaneous allocation");
  common(cond);
  n_dirs(cond, "Number of sampled directions");
  cond->add_flag("--biased", opt.biased, "Apply the kinematic tilt bias");

  CLI::App* eff = app.add_subcommand("efficiency", "Hover efficiency over orientations");
  common(eff);
  n_dirs(eff, "Number of sampled orientations");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (sim->parsed()) {
      if (!positional.empty() && !opt.experiment.empty() && positional != opt.experiment) {
        throw UsageError("experiment given twice with different names");
      }
      if (!positional.empty()) {
        opt.experiment = positional;
      }
      return cmd_simulate(resolve(opt));
    }
    if (env->parsed()) {
      return cmd_envelope(resolve(opt));
    }
    if (cond->parsed()) {
      return cmd_condmap(resolve(opt));
    }
    return cmd_efficiency(resolve(opt));
  } catch (const UsageError& e) {
    std::cerr << "omnidyn: " << e.what() << "\n";
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "omnidyn: " << e.what() << "\n";
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "omnidyn: numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const InvalidArgument& e) {
    std::cerr << "omnidyn: " << e.what() << "\n";
    return kConfig;
  }
}
