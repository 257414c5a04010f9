#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "epiguard/sim.hpp"

namespace epiguard {

/// Stable process exit codes for the command-line tool.
enum class ExitCode : int {
  Success = 0,
  Failure = 1,
  Validation = 2,
  SafetyViolation = 3,  ///< h < -1e-6 C in guaranteed mode
  Infeasible = 4,       ///< the controller output had to be clamped
};

struct Peak {
  std::string compartment;
  double value = 0.0;
  double time = 0.0;
};

struct RunReport {
  std::string scenario;
  std::string model;
  std::string feedback;
  double tau = 0.0;
  bool guaranteed = true;
  std::size_t samples = 0;
  std::optional<std::string> parameter;  ///< set by sweep
  std::optional<double> value;
  AuditReport audit;
  std::vector<Peak> peaks;
  double max_population_drift = 0.0;  ///< max |sum(x(t)) - sum(x(0))|
  std::vector<std::string> outputs;

  ExitCode exit_code() const noexcept;
  /// Largest amount by which any constraint's compartment crossed its bound.
  double max_overshoot() const noexcept;
  std::string to_json() const;
};

struct RunOptions {
  /// Writes trajectory.csv, trajectory_long.csv, scenario.txt and report.json here.
  std::optional<std::filesystem::path> out_dir;
};

RunReport run(const Scenario& scenario, const RunOptions& options = {});
/// Also hands back the simulated trajectory.
RunReport run(const Scenario& scenario, const RunOptions& options, Trajectory& trajectory);

/// One run per value of `parameter` (see with_parameter), executed in parallel,
/// returned sorted by value. Outputs go to out_dir/<parameter>=<value>/.
std::vector<RunReport> sweep(const Scenario& scenario, const std::string& parameter,
                             const std::vector<double>& values, const RunOptions& options = {});

}  // namespace epiguard
