#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chid/io/config.hpp"
#include "chid/observation.hpp"

namespace chid::tools {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kNumericalError = 2,
  kSuiteFailure = 3,
};

struct CommandOptions {
  io::RunConfig config;
  /// Input container; defaults to the previous stage's file in the output
  /// directory.
  std::optional<std::string> input;
  std::size_t threads = 1;
  /// Progress and timing messages; never written into report files.
  std::ostream* log = nullptr;
};

/// Forward run. Writes trajectory.chid, simulate_report.json.
int cmd_simulate(const CommandOptions& opts);
/// Data grid restriction, optional noise and diagnostics. Writes
/// observation.chid, diagnostics.csv, make_data_report.json.
int cmd_make_data(const CommandOptions& opts);
/// Assembly, alpha selection, solve and error measures. Writes
/// solution.json, reconstruction.csv, identify_report.json and, when alpha
/// is chosen on the L-curve, lcurve.csv.
int cmd_identify(const CommandOptions& opts);
/// L-curve sweep only. Writes lcurve.csv, lcurve_report.json.
int cmd_lcurve(const CommandOptions& opts);
/// Invariant suite. Writes verify_report.json; returns kSuiteFailure if any
/// check fails.
int cmd_verify(const CommandOptions& opts);

/// Data indices selected by the configuration: explicit instants, otherwise
/// the window.
std::vector<std::size_t> selected_indices(const io::DataConfig& config,
                                          const ObservationData& data);

}  // namespace chid::tools
