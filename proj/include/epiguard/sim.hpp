#pragma once

// Fixed-step closed-loop simulation with zero-order-held input, optional
// measurement delay (with or without predictor compensation) and bounded
// input disturbance, plus trajectory safety auditing.

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "epiguard/models.hpp"
#include "epiguard/safety.hpp"

namespace epiguard {

struct InstantaneousFeedback {
  friend bool operator==(const InstantaneousFeedback&, const InstantaneousFeedback&) = default;
};
struct DelayedFeedback {
  double tau = 0.0;
  friend bool operator==(const DelayedFeedback&, const DelayedFeedback&) = default;
};
struct PredictorFeedback {
  double tau = 0.0;
  friend bool operator==(const PredictorFeedback&, const PredictorFeedback&) = default;
};

using FeedbackMode = std::variant<InstantaneousFeedback, DelayedFeedback, PredictorFeedback>;

const char* feedback_name(const FeedbackMode& mode);
double feedback_delay(const FeedbackMode& mode);

/// d(t) drawn i.i.d. uniform on [-delta, delta] each step.
struct BoundedDisturbance {
  double delta = 0.0;
  std::uint64_t seed = 0;
  friend bool operator==(const BoundedDisturbance&, const BoundedDisturbance&) = default;
};

struct Scenario {
  std::string name;
  ModelSpec spec;
  ModelState state0;
  double t_start = 0.0;
  double t_end = 0.0;
  double dt = 0.1;
  double control_start = 0.0;  ///< u = 0 before this time
  std::vector<SafetyConstraint> constraints;
  FeedbackMode feedback = InstantaneousFeedback{};
  std::optional<BoundedDisturbance> disturbance;
  /// Refuse to start when the initial-condition checks fail.
  bool guaranteed = true;
  /// Predictor integration step; 0 means dt.
  double predictor_dt = 0.0;
  /// Plant parameters when they differ from the controller's model.
  std::optional<ModelSpec> plant;
  /// Recorded states for times before t_start (time, state). Missing times use state0.
  std::vector<std::pair<double, ModelState>> prehistory;
  /// ISO-8601 calendar date of t_start, if the scenario is date-anchored.
  std::optional<std::string> start_date;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws ValidationError describing the first broken invariant.
void validate_scenario(const Scenario& scenario);

/// Number of whole dt steps in `span`; throws when span is not a multiple of dt.
std::size_t whole_steps(double span, double dt, const char* what);

struct Trajectory {
  std::vector<std::string> labels;
  std::size_t n = 0;
  std::vector<std::string> constraint_names;
  double dt = 0.0;

  std::vector<double> times;
  std::vector<ModelState> states;
  std::vector<ControlDecision> inputs;
  std::vector<double> disturbances;
  std::vector<double> applied;                 ///< clamp(u + d, 0, 1), the input the plant saw
  std::vector<ModelState> feedback_states;     ///< state handed to the controller
  std::vector<std::vector<double>> barriers;   ///< h per constraint at the true state
  std::vector<std::vector<double>> extended;   ///< h^e per constraint (NaN for multiplicative)
  std::vector<std::size_t> singular_steps;     ///< controller had no authority; u fell back to 0

  std::size_t size() const noexcept { return times.size(); }
};

/// Ring buffer of past states on the dt grid, for delayed lookups.
class MeasurementBuffer {
 public:
  MeasurementBuffer(std::size_t delay_steps, double t_start, double dt, ModelState fallback,
                    const std::vector<std::pair<double, ModelState>>& prehistory = {});

  /// Appends the state at the next grid time.
  void push(const ModelState& state);
  /// State recorded delay_steps before grid step `step`; prehistory when that precedes t_start.
  const ModelState& delayed(std::size_t step) const;
  std::size_t capacity() const noexcept { return capacity_; }

 private:
  std::size_t delay_steps_;
  std::size_t capacity_;
  std::size_t pushed_ = 0;
  std::deque<ModelState> ring_;
  ModelState fallback_;
  std::vector<std::optional<ModelState>> before_start_;  // index k: t_start - (k + 1) dt
};

/// Classical RK4 step with u held constant over the step.
ModelState rk4_step(const ModelSpec& spec, const ModelState& state, double u, double dt);

Trajectory simulate(const Scenario& scenario);

struct ConstraintAudit {
  std::string name;
  double min_barrier = std::numeric_limits<double>::infinity();
  double min_barrier_time = 0.0;
  std::size_t negative_samples = 0;     ///< samples with h < 0
  std::vector<double> negative_times;   ///< first 100 of them
  double violation_tol = 0.0;           ///< 1e-6 * C
  std::size_t violations = 0;           ///< samples with h < -violation_tol
  double audit_tol = 0.0;               ///< 1e-6 * alpha * C
  std::size_t rate_failures = 0;        ///< (h[k+1]-h[k])/dt + alpha h[k] < -audit_tol
  std::optional<double> min_extended;   ///< outlet constraints only
};

struct AuditReport {
  std::vector<ConstraintAudit> constraints;
  std::vector<double> infeasible_times;  ///< u_raw outside [0, 1], input clamped
  std::vector<double> singular_times;

  bool safe() const noexcept;
  bool clamped() const noexcept { return !infeasible_times.empty(); }
};

AuditReport safety_audit(const Trajectory& trajectory, const ModelSpec& spec,
                         std::span<const SafetyConstraint> constraints);

}  // namespace epiguard
