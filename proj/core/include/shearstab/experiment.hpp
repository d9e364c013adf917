#pragma once

#include <iosfwd>
#include <string>

#include "shearstab/config.hpp"

namespace shearstab {

/// Process exit codes of the experiment driver.
enum ExitCode : int {
  exit_ok = 0,
  exit_acceptance_failed = 1,
  exit_config_error = 2,
  exit_numerical_failure = 3
};

struct ExperimentOutcome {
  int exit_code = exit_ok;
  std::string message;
  std::string output_dir;   // <output_dir>/<kind>
};

/// Validates the configuration, runs the experiment and writes results.csv,
/// summary.json and timings.json under <output_dir>/<kind>/. Progress lines go
/// to `log`. Errors are mapped to exit codes rather than thrown.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace shearstab
