// epiguard: run, audit and sweep safety-critical intervention scenarios.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "epiguard/cases.hpp"
#include "epiguard/errors.hpp"
#include "epiguard/runner.hpp"
#include "epiguard/scenario_io.hpp"
#include "epiguard/trajectory_io.hpp"

namespace fs = std::filesystem;
using namespace epiguard;

namespace {

int code(ExitCode c) { return static_cast<int>(c); }

// A scenario argument is a file path, or a bundled preset name.
Scenario load_scenario(const std::string& arg) {
  if (fs::exists(arg)) return parse_scenario(arg);
  for (const auto& p : presets()) {
    if (p.name == arg) return load_preset(arg);
  }
  throw ValidationError("no scenario file or preset named '" + arg + "'");
}

struct Overrides {
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

Scenario apply(Scenario sc, const Overrides& o) {
  if (o.dt) sc = with_parameter(sc, "dt", *o.dt);
  if (o.seed) {
    if (!sc.disturbance) sc.disturbance = BoundedDisturbance{};
    sc.disturbance->seed = *o.seed;
  }
  if (o.mode) {
    const double tau = feedback_delay(sc.feedback);
    if (*o.mode == "instantaneous") sc.feedback = InstantaneousFeedback{};
    if (*o.mode == "delayed") sc.feedback = DelayedFeedback{tau};
    if (*o.mode == "predictor") sc.feedback = PredictorFeedback{tau};
  }
  validate_scenario(sc);
  return sc;
}

void print_summary(const RunReport& r) {
  std::printf("scenario %s (%s, %s feedback, tau %g d, %zu samples)\n", r.scenario.c_str(), r.model.c_str(),
              r.feedback.c_str(), r.tau, r.samples);
  if (r.parameter) std::printf("  %s = %s\n", r.parameter->c_str(), format_number(*r.value).c_str());
  for (const auto& c : r.audit.constraints) {
    std::printf("  %-10s min h %.6g at t=%g  violations %zu  negative samples %zu\n", c.name.c_str(),
                c.min_barrier, c.min_barrier_time, c.violations, c.negative_samples);
  }
  for (const auto& p : r.peaks) std::printf("  peak %-3s %.6g at t=%g\n", p.compartment.c_str(), p.value, p.time);
  if (r.audit.clamped()) {
    std::printf("  input clamped at %zu samples (first t=%g)\n", r.audit.infeasible_times.size(),
                r.audit.infeasible_times.front());
  }
  for (const auto& path : r.outputs) std::printf("  wrote %s\n", path.c_str());
}

std::vector<double> parse_values(const std::string& list) {
  std::vector<double> values;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size()) throw ValidationError("bad value '" + item + "' in --values");
    values.push_back(v);
  }
  return values;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safety-critical intervention policies for compartmental epidemic models"};
  app.require_subcommand(1);

  std::string out_dir;
  Overrides overrides;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out_dir, "Directory for CSV/JSON outputs");
    sub->add_option("--dt", overrides.dt, "Integration step in days");
    sub->add_option("--seed", overrides.seed, "Disturbance seed");
    sub->add_option("--mode", overrides.mode, "Feedback mode")
        ->check(CLI::IsMember({"instantaneous", "delayed", "predictor"}));
  };

  std::string scenario_arg;
  auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a scenario file or preset");
  simulate_cmd->add_option("scenario", scenario_arg, "Scenario file or preset name")->required();
  add_common(simulate_cmd);

  std::string trajectory_arg;
  auto* audit_cmd = app.add_subcommand("audit", "Audit a trajectory CSV against a scenario's constraints");
  audit_cmd->add_option("trajectory", trajectory_arg, "Trajectory CSV")->required();
  audit_cmd->add_option("scenario", scenario_arg, "Scenario file or preset name")->required();

  std::string param, values_arg;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a scenario for each value of one parameter");
  sweep_cmd->add_option("scenario", scenario_arg, "Scenario file or preset name")->required();
  sweep_cmd->add_option("--param", param, "Parameter name (tau, dt, delta, alpha, bound.<X>, ...)")->required();
  sweep_cmd->add_option("--values", values_arg, "Comma-separated values")->required();
  add_common(sweep_cmd);

  std::string cases_arg;
  double exponent = 1.0 / 3.0;
  auto* ingest_cmd = app.add_subcommand("ingest", "Validate a case CSV and scale by positivity");
  ingest_cmd->add_option("cases", cases_arg, "date,cumulative_confirmed[,positivity_rate][,mobility_index]")
      ->required();
  ingest_cmd->add_option("--exponent", exponent, "Positivity scaling exponent (default 1/3)");
  ingest_cmd->add_option("--out", out_dir, "Directory for scaled_cases.csv");

  auto* presets_cmd = app.add_subcommand("presets", "Bundled scenarios");
  presets_cmd->require_subcommand(1);
  presets_cmd->add_subcommand("list", "List preset names");
  std::string preset_name;
  auto* show_cmd = presets_cmd->add_subcommand("show", "Print a preset scenario file");
  show_cmd->add_option("name", preset_name)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : code(ExitCode::Validation);
  }

  try {
    RunOptions options;
    if (!out_dir.empty()) options.out_dir = fs::path(out_dir);

    if (simulate_cmd->parsed()) {
      const Scenario sc = apply(load_scenario(scenario_arg), overrides);
      const RunReport report = run(sc, options);
      print_summary(report);
      return code(report.exit_code());
    }

    if (audit_cmd->parsed()) {
      const Scenario sc = load_scenario(scenario_arg);
      const Trajectory traj = import_trajectory(trajectory_arg, sc.spec);
      const AuditReport audit = safety_audit(traj, sc.spec, sc.constraints);
      RunReport report;
      report.scenario = sc.name;
      report.model = to_string(sc.spec.kind());
      report.feedback = "recorded";
      report.guaranteed = sc.guaranteed;
      report.samples = traj.size();
      report.audit = audit;
      print_summary(report);
      return code(report.exit_code());
    }

    if (sweep_cmd->parsed()) {
      const Scenario sc = apply(load_scenario(scenario_arg), overrides);
      const auto reports = sweep(sc, param, parse_values(values_arg), options);
      ExitCode worst = ExitCode::Success;
      for (const auto& r : reports) {
        print_summary(r);
        worst = std::max(worst, r.exit_code() == ExitCode::SafetyViolation ? ExitCode::SafetyViolation
                                                                          : r.exit_code());
      }
      return code(worst);
    }

    if (ingest_cmd->parsed()) {
      const auto records = ingest_cases(cases_arg);
      std::printf("%zu records", records.size());
      if (!records.empty()) std::printf(" from %s to %s", records.front().date.c_str(), records.back().date.c_str());
      std::printf("\n");
      const bool has_positivity =
          !records.empty() && std::all_of(records.begin(), records.end(), [](const auto& r) { return r.positivity_rate.has_value(); });
      if (has_positivity) {
        const ScaledCases scaled = scale_cases(records, exponent);
        std::ostringstream csv;
        csv << "# " << scaled.formula << "\ndate,scaled_confirmed\n";
        for (std::size_t k = 0; k < scaled.dates.size(); ++k) {
          csv << scaled.dates[k] << ',' << format_number(scaled.scaled_confirmed[k]) << '\n';
        }
        if (options.out_dir) {
          fs::create_directories(*options.out_dir);
          const auto path = *options.out_dir / "scaled_cases.csv";
          std::ofstream(path, std::ios::binary) << csv.str();
          std::printf("# %s\nwrote %s\n", scaled.formula.c_str(), path.string().c_str());
        } else {
          std::fputs(csv.str().c_str(), stdout);
        }
      }
      return 0;
    }

    if (presets_cmd->parsed()) {
      if (show_cmd->parsed()) {
        for (const auto& p : presets()) {
          if (p.name == preset_name) {
            std::fputs(p.text.c_str(), stdout);
            return 0;
          }
        }
        throw ValidationError("unknown preset '" + preset_name + "'");
      }
      for (const auto& p : presets()) std::printf("%-18s %s\n", p.name.c_str(), p.description.c_str());
      return 0;
    }
  } catch (const ValidationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(ExitCode::Validation);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return code(ExitCode::Failure);
  }
  return 0;
}
