#pragma once

// Predictor feedback for measurement delays and the input-to-state-safety
// margin of the multiplicative barrier under a bounded input disturbance.

#include <cstdint>
#include <limits>

#include "epiguard/models.hpp"
#include "epiguard/safety.hpp"

namespace epiguard {

struct Trajectory;

struct PredictorConfig {
  double tau = 0.0;
  double dt_pred = 0.1;
  SafetyController controller;
  /// Inside the prediction window the input is 0 before this time.
  double control_start = -std::numeric_limits<double>::infinity();
};

void validate_predictor(const PredictorConfig& config);

/// Integrates the delay-free closed loop from the measurement taken at
/// `measured_time` over tau, re-evaluating the controller every dt_pred.
/// Throws PredictionError (with the failing time) on controller singularity.
ModelState predict_state(const ModelSpec& spec, const ModelState& measured,
                         const PredictorConfig& config, double measured_time = 0.0);

/// Infinity norm of predicted - actual.
double prediction_error(const ModelState& predicted, const ModelState& actual);

/// A(predicted) - A(actual) for the applied (clamped) input.
double input_disturbance(const ModelSpec& spec, const SafetyController& controller,
                         const ModelState& predicted, const ModelState& actual);

struct StateBox {
  Vector lower;
  Vector upper;
};

/// Largest |A(x1) - A(x2)| / |x1 - x2|_inf over all pairs of `samples` points
/// drawn uniformly in the box. A lower bound on the true Lipschitz constant;
/// with a fixed seed, more samples never decrease the estimate.
double estimate_lipschitz(const ModelSpec& spec, const SafetyController& controller,
                          const StateBox& box, std::size_t samples, std::uint64_t seed = 1);

struct IssfBound {
  double delta = 0.0;        ///< input disturbance bound
  double epsilon = 0.0;      ///< prediction error bound, persons
  double lipschitz_c = 0.0;  ///< 1/persons

  /// delta = c * epsilon.
  static IssfBound from_prediction_error(double lipschitz_c, double epsilon);
};

/// h(x) + (delta / alpha) |g_i(w)|, evaluated at the given state.
double issf_inflated_barrier(const ModelSpec& spec, const SafetyConstraint& constraint,
                             const ModelState& state, const IssfBound& bound);

struct IssfAudit {
  double min_barrier = 0.0;           ///< min over time of h
  double min_inflated = 0.0;          ///< min over time of h_d, pointwise |g_i|
  double max_abs_gain = 0.0;          ///< max over time of |g_i|
  double min_inflated_sup = 0.0;      ///< min over time of h + (delta/alpha) max_t |g_i|
};

IssfAudit issf_audit(const Trajectory& trajectory, const ModelSpec& spec,
                     const SafetyConstraint& constraint, double delta);

}  // namespace epiguard
