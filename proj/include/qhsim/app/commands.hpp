#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qhsim/app/config.hpp"
#include "qhsim/app/output.hpp"
#include "qhsim/evolve.hpp"

namespace qhsim::app {

struct CommandOptions {
  std::filesystem::path output_dir = ".";
  std::optional<double> dt;           // overrides schedule.dt
  std::optional<std::uint64_t> seed;  // reserved; all computation is deterministic
  std::optional<std::string> format;  // forces csv | json for every output
  unsigned jobs = 0;                  // sweep workers; 0 = hardware concurrency
};

/// Exit status of a sweep whose grid contained failed points.
inline constexpr int kSweepPartialFailure = 3;

struct RunResult {
  EvolutionRecord record;
  DriftSummary summary;
};

/// Validates the model over the schedule, then evolves the initial state.
RunResult execute_run(const ExperimentConfig& config);

/// Result table for a run restricted to `quantities` (empty: all).
Table run_table(const RunResult& result, const std::vector<std::string>& quantities);

/// Static diagnostics at t0: residuals of the biorthogonal system, the
/// quasi-Hermiticity residual, metric eigenvalues and the omega^2 - Theta residual.
nlohmann::ordered_json check_report(const ExperimentConfig& config);

/// One summary row per grid point, ordered by grid index. Failed points are
/// kept as rows with status "failed".
Table sweep_table(const ExperimentConfig& config, unsigned jobs = 0);

int run_command(const std::filesystem::path& config_path, const CommandOptions& options,
                std::ostream& out);
int check_command(const std::filesystem::path& config_path, const CommandOptions& options,
                  std::ostream& out);
int sweep_command(const std::filesystem::path& config_path, const CommandOptions& options,
                  std::ostream& out);

}  // namespace qhsim::app
