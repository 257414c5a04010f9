#include "epiguard/runner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <numeric>

#include <json.hpp>

#include "epiguard/errors.hpp"
#include "epiguard/scenario_io.hpp"
#include "epiguard/trajectory_io.hpp"

namespace epiguard {

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("write failed for " + path.string());
}

std::vector<std::size_t> sorted_order(const std::vector<double>& values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  return order;
}

}  // namespace

ExitCode RunReport::exit_code() const noexcept {
  if (guaranteed && !audit.safe()) return ExitCode::SafetyViolation;
  if (audit.clamped()) return ExitCode::Infeasible;
  return ExitCode::Success;
}

double RunReport::max_overshoot() const noexcept {
  double worst = 0.0;
  for (const auto& c : audit.constraints) worst = std::max(worst, -c.min_barrier);
  return worst;
}

std::string RunReport::to_json() const {
  nlohmann::ordered_json j;
  j["scenario"] = scenario;
  j["model"] = model;
  j["feedback"] = feedback;
  j["tau"] = tau;
  j["guaranteed"] = guaranteed;
  j["samples"] = samples;
  if (parameter) {
    j["parameter"] = *parameter;
    j["value"] = *value;
  }
  j["exit_code"] = static_cast<int>(exit_code());
  j["max_population_drift"] = max_population_drift;
  auto& cons = j["constraints"] = nlohmann::ordered_json::array();
  for (const auto& c : audit.constraints) {
    nlohmann::ordered_json a;
    a["name"] = c.name;
    a["min_h"] = c.min_barrier;
    a["min_h_time"] = c.min_barrier_time;
    a["negative_samples"] = c.negative_samples;
    a["violations"] = c.violations;
    a["violation_tol"] = c.violation_tol;
    a["rate_condition_failures"] = c.rate_failures;
    a["audit_tol"] = c.audit_tol;
    if (c.min_extended) a["min_he"] = *c.min_extended;
    cons.push_back(std::move(a));
  }
  j["infeasible_samples"] = audit.infeasible_times.size();
  if (!audit.infeasible_times.empty()) {
    j["first_infeasible_time"] = audit.infeasible_times.front();
    j["last_infeasible_time"] = audit.infeasible_times.back();
  }
  j["singular_samples"] = audit.singular_times.size();
  auto& pk = j["peaks"] = nlohmann::ordered_json::array();
  for (const auto& p : peaks) pk.push_back({{"compartment", p.compartment}, {"value", p.value}, {"time", p.time}});
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

RunReport run(const Scenario& scenario, const RunOptions& options) {
  Trajectory traj;
  return run(scenario, options, traj);
}

RunReport run(const Scenario& sc, const RunOptions& options, Trajectory& traj) {
  traj = simulate(sc);

  RunReport report;
  report.scenario = sc.name;
  report.model = to_string(sc.spec.kind());
  report.feedback = feedback_name(sc.feedback);
  report.tau = feedback_delay(sc.feedback);
  report.guaranteed = sc.guaranteed;
  report.samples = traj.size();
  report.audit = safety_audit(traj, sc.spec, sc.constraints);

  const double total0 = traj.states.front().total();
  for (const auto& x : traj.states) {
    report.max_population_drift = std::max(report.max_population_drift, std::abs(x.total() - total0));
  }
  for (std::size_t c = 0; c < traj.labels.size(); ++c) {
    Peak p{traj.labels[c], -std::numeric_limits<double>::infinity(), 0.0};
    for (std::size_t k = 0; k < traj.size(); ++k) {
      if (traj.states[k][c] > p.value) {
        p.value = traj.states[k][c];
        p.time = traj.times[k];
      }
    }
    report.peaks.push_back(p);
  }

  if (options.out_dir) {
    std::filesystem::create_directories(*options.out_dir);
    const auto emit = [&](const char* file, const std::string& text) {
      const auto path = *options.out_dir / file;
      write_text(path, text);
      report.outputs.push_back(path.string());
    };
    emit("trajectory.csv", trajectory_csv(traj));
    emit("trajectory_long.csv", trajectory_long_csv(traj));
    emit("scenario.txt", write_scenario(sc));
    report.outputs.push_back((*options.out_dir / "report.json").string());
    write_text(*options.out_dir / "report.json", report.to_json());
  }
  return report;
}

std::vector<RunReport> sweep(const Scenario& scenario, const std::string& parameter,
                             const std::vector<double>& values, const RunOptions& options) {
  std::vector<Scenario> variants;
  variants.reserve(values.size());
  for (double v : values) variants.push_back(with_parameter(scenario, parameter, v));

  std::vector<std::future<RunReport>> jobs;
  for (std::size_t k = 0; k < variants.size(); ++k) {
    RunOptions local;
    if (options.out_dir) local.out_dir = *options.out_dir / (parameter + "=" + format_number(values[k]));
    jobs.push_back(std::async(std::launch::async, [&variants, k, local] { return run(variants[k], local); }));
  }

  std::vector<RunReport> reports;
  reports.reserve(values.size());
  for (std::size_t k : sorted_order(values)) {
    RunReport r = jobs[k].get();
    r.parameter = parameter;
    r.value = values[k];
    if (options.out_dir) {
      write_text(*options.out_dir / (parameter + "=" + format_number(values[k])) / "report.json", r.to_json());
    }
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace epiguard
