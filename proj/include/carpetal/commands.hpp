#pragma once

#include <iosfwd>

#include <json.hpp>

#include "carpetal/config.hpp"

namespace carpetal {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kExitOk = 0,
  kExitPhysicsFailure = 1,
  kExitConfigError = 2,
  kExitIoError = 3,
};

struct RunOptions {
  unsigned workers = 1;
  double tolerance_scale = 1.0;
};

struct CommandResult {
  int exit_code = kExitOk;
  nlohmann::json report;
};

// Each command writes its artifacts and a "<command>_report.json" under
// config.outputs.directory and returns the same report. Library errors propagate
// as exceptions; map them with exit_code_for().

/// Renders the carpet, exports CSV/PGM, and detects the d/2-shifted and full
/// recurrences.
CommandResult cmd_carpet(const RunConfig& config, const RunOptions& options);

/// Sorkin hierarchy over seeded random samples; max_order <= 0 uses the slit count.
CommandResult cmd_sorkin(const RunConfig& config, int max_order, const RunOptions& options);

/// Trajectory bundle export plus a status manifest.
CommandResult cmd_traj(const RunConfig& config, const RunOptions& options);

/// Oracle equivalence, projection reductions, gradient and decomposition checks.
CommandResult cmd_validate(const RunConfig& config, const RunOptions& options);

/// Point-by-point current algebra vs wave-mechanics comparison.
CommandResult cmd_compare(const RunConfig& config, const RunOptions& options);

/// Maps an in-flight exception to the documented exit code.
int exit_code_for(const std::exception& error);

}  // namespace carpetal
