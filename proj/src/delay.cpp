#include "epiguard/delay.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "epiguard/errors.hpp"
#include "epiguard/sim.hpp"

namespace epiguard {

void validate_predictor(const PredictorConfig& config) {
  if (!(config.tau >= 0.0) || !std::isfinite(config.tau)) throw ValidationError("tau must be >= 0");
  if (!(config.dt_pred > 0.0)) throw ValidationError("predictor step must be > 0");
  if (config.tau > 0.0) whole_steps(config.tau, config.dt_pred, "tau");
}

ModelState predict_state(const ModelSpec& spec, const ModelState& measured,
                         const PredictorConfig& config, double measured_time) {
  validate_predictor(config);
  check_dimensions(spec, measured);
  const std::size_t steps = config.tau > 0.0 ? whole_steps(config.tau, config.dt_pred, "tau") : 0;

  ModelState x = measured;
  for (std::size_t s = 0; s < steps; ++s) {
    const double theta = measured_time + static_cast<double>(s) * config.dt_pred;
    double u = 0.0;
    if (theta >= config.control_start - 1e-9 * config.dt_pred) {
      try {
        u = config.controller.decide(spec, x).u;
      } catch (const SingularControlError& e) {
        throw PredictionError(std::string("controller singular during prediction at theta = ") +
                                  std::to_string(theta) + ": " + e.what(),
                              theta);
      }
    }
    x = rk4_step(spec, x, u, config.dt_pred);
  }
  return x;
}

double prediction_error(const ModelState& predicted, const ModelState& actual) {
  if (predicted.size() != actual.size() || predicted.n() != actual.n()) {
    throw ValidationError("prediction_error: state dimensions differ");
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < predicted.size(); ++k) {
    worst = std::max(worst, std::abs(predicted[k] - actual[k]));
  }
  return worst;
}

double input_disturbance(const ModelSpec& spec, const SafetyController& controller,
                         const ModelState& predicted, const ModelState& actual) {
  return controller.decide(spec, predicted).u - controller.decide(spec, actual).u;
}

double estimate_lipschitz(const ModelSpec& spec, const SafetyController& controller,
                          const StateBox& box, std::size_t samples, std::uint64_t seed) {
  if (samples < 2) throw ValidationError("Lipschitz estimate needs at least 2 samples");
  const std::size_t dim = spec.n() + spec.m();
  if (box.lower.size() != dim || box.upper.size() != dim) {
    throw ValidationError("state box dimensions do not match the model");
  }
  for (std::size_t k = 0; k < dim; ++k) {
    if (box.upper[k] < box.lower[k]) throw ValidationError("state box has upper < lower");
  }

  std::mt19937_64 rng(seed);
  std::vector<ModelState> points;
  std::vector<double> values;
  points.reserve(samples);
  values.reserve(samples);
  for (std::size_t s = 0; s < samples; ++s) {
    Vector v(dim);
    for (std::size_t k = 0; k < dim; ++k) {
      const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      v[k] = box.lower[k] + unit * (box.upper[k] - box.lower[k]);
    }
    points.push_back(ModelState::from_flat(std::move(v), spec.n()));
    values.push_back(controller.decide(spec, points.back()).u);
  }

  double estimate = 0.0;
  for (std::size_t a = 1; a < samples; ++a) {
    for (std::size_t b = 0; b < a; ++b) {
      const double gap = prediction_error(points[a], points[b]);
      if (gap > 0.0) estimate = std::max(estimate, std::abs(values[a] - values[b]) / gap);
    }
  }
  return estimate;
}

IssfBound IssfBound::from_prediction_error(double lipschitz_c, double epsilon) {
  if (!(lipschitz_c >= 0.0) || !(epsilon >= 0.0)) {
    throw ValidationError("Lipschitz constant and prediction error bound must be >= 0");
  }
  return {lipschitz_c * epsilon, epsilon, lipschitz_c};
}

namespace {

void require_multiplicative(const SafetyConstraint& c) {
  if (c.group != CompartmentGroup::Multiplicative) {
    throw ValidationError("the input-to-state safety margin is available for multiplicative constraints only");
  }
}

}  // namespace

double issf_inflated_barrier(const ModelSpec& spec, const SafetyConstraint& constraint,
                             const ModelState& state, const IssfBound& bound) {
  require_multiplicative(constraint);
  if (!(bound.delta >= 0.0)) throw ValidationError("delta must be >= 0");
  const double h = barrier_value(spec, constraint, state);
  const double gain = std::abs(spec.control_gain(state.w())[constraint.index]);
  return h + bound.delta / constraint.alpha * gain;
}

IssfAudit issf_audit(const Trajectory& traj, const ModelSpec& spec,
                     const SafetyConstraint& constraint, double delta) {
  require_multiplicative(constraint);
  if (traj.size() == 0) throw ValidationError("cannot audit an empty trajectory");
  const IssfBound bound{delta, 0.0, 0.0};
  IssfAudit out;
  out.min_barrier = std::numeric_limits<double>::infinity();
  out.min_inflated = std::numeric_limits<double>::infinity();
  for (const auto& x : traj.states) {
    out.min_barrier = std::min(out.min_barrier, barrier_value(spec, constraint, x));
    out.min_inflated = std::min(out.min_inflated, issf_inflated_barrier(spec, constraint, x, bound));
    out.max_abs_gain = std::max(out.max_abs_gain, std::abs(spec.control_gain(x.w())[constraint.index]));
  }
  out.min_inflated_sup = out.min_barrier + delta / constraint.alpha * out.max_abs_gain;
  return out;
}

}  // namespace epiguard
