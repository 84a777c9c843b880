#pragma once

/**
 * @file config.hpp
 * @brief JSON run configuration: every parameter block plus the CLI selectors.
 *
 * Any numeric field may be written either as a bare number or as
 * {"value": x, "source": "paper" | "assumed"}. Angles are in radians.
 * Unknown keys are rejected so typos do not silently fall back to defaults.
 */

#include "omnidyn/sim.hpp"

#include <filesystem>
#include <string>

namespace omnidyn {

struct RunConfig {
  SimSetup setup{};
  std::string output_dir{"out"};
  std::string experiment{"translation"};
  int n_dirs{2000};     // direction count for the sweeps
  bool biased{false};   // condition map with the tilt bias applied

  /// Validates every parameter block; throws ConfigError naming the block.
  void validate() const;
};

/// Parses @p text. Syntax errors report line, column and the offending line.
RunConfig parse_run_config(const std::string& text, const std::string& origin = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);

/// Complete configuration as JSON, with source annotations on placeholder values.
/// Parsing the result gives back an identical configuration.
std::string dump_run_config(const RunConfig& config);

}  // namespace omnidyn
