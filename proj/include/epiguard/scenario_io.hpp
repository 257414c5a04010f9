#pragma once

// Scenario files: versioned plain-text key/value pairs grouped in sections.
//
//   schema_version = 1
//   name = sir_fig2
//
//   [model]        kind = sir|seir|sihrd, plus its rate parameters and population
//   [initial]      one key per compartment label
//   [time]         start_date (ISO-8601, optional), t_start, t_end, dt, control_start;
//                  times accept a number of days or an ISO date when start_date is set
//   [feedback]     mode = instantaneous|delayed|predictor, tau, predictor_dt, guaranteed
//   [disturbance]  delta, seed
//   [constraint]   compartment, bound, direction = upper|lower, alpha, alpha_e
//                  (repeat the section for several constraints)
//   [plant]        model parameters that differ in the simulated plant
//   [prehistory]   row = t, x1, ..., x(n+m)   and/or   file = relative/path.csv
//
// '#' starts a comment. Unknown sections or keys are rejected.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "epiguard/sim.hpp"

namespace epiguard {

inline constexpr int kScenarioSchemaVersion = 1;

Scenario parse_scenario(const std::filesystem::path& path);

/// `source` names the input in diagnostics; relative prehistory files resolve against `base_dir`.
Scenario parse_scenario_text(std::string_view text, const std::string& source = "<scenario>",
                             const std::filesystem::path& base_dir = {});

/// Canonical text form; parse_scenario_text(write_scenario(s)) == s.
std::string write_scenario(const Scenario& scenario);

/// Days from 1970-01-01 for an ISO-8601 calendar date, or throws ValidationError.
long long parse_iso_date(std::string_view text);
std::string format_iso_date(long long days);

struct Preset {
  std::string name;
  std::string description;
  std::string text;
};

const std::vector<Preset>& presets();
/// Parsed preset by name; throws ValidationError for unknown names.
Scenario load_preset(const std::string& name);

/// Applies one named parameter override (tau, dt, delta, seed, control_start, t_end,
/// predictor_dt, beta0, gamma, sigma, lambda, nu, mu, population, alpha, alpha_e, or
/// bound.<compartment>) and revalidates.
Scenario with_parameter(const Scenario& scenario, const std::string& parameter, double value);

/// %.17g, the formatting used for every number we write.
std::string format_number(double value);

}  // namespace epiguard
