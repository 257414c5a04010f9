#include "epiguard/sim.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "epiguard/delay.hpp"
#include "epiguard/errors.hpp"

namespace epiguard {

const char* feedback_name(const FeedbackMode& mode) {
  switch (mode.index()) {
    case 0: return "instantaneous";
    case 1: return "delayed";
    default: return "predictor";
  }
}

double feedback_delay(const FeedbackMode& mode) {
  if (const auto* d = std::get_if<DelayedFeedback>(&mode)) return d->tau;
  if (const auto* p = std::get_if<PredictorFeedback>(&mode)) return p->tau;
  return 0.0;
}

std::size_t whole_steps(double span, double dt, const char* what) {
  const double ratio = span / dt;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 * std::max(1.0, rounded)) {
    throw ValidationError(std::string(what) + " (" + std::to_string(span) +
                          ") must be an integer multiple of dt (" + std::to_string(dt) + ")");
  }
  return static_cast<std::size_t>(rounded);
}

void validate_scenario(const Scenario& sc) {
  validate_initial_state(sc.spec, sc.state0);
  if (!std::isfinite(sc.t_start) || !std::isfinite(sc.t_end)) throw ValidationError("times must be finite");
  if (sc.t_end < sc.t_start) throw ValidationError("t_end must not precede t_start");
  if (!(sc.dt > 0.0) || !std::isfinite(sc.dt)) throw ValidationError("dt must be > 0");
  if (sc.control_start < sc.t_start || sc.control_start > sc.t_end) {
    throw ValidationError("control_start must lie in [t_start, t_end]");
  }
  const double tau = feedback_delay(sc.feedback);
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ValidationError("tau must be >= 0");
  whole_steps(tau, sc.dt, "tau");
  if (sc.predictor_dt < 0.0) throw ValidationError("predictor_dt must be >= 0");
  if (sc.predictor_dt > 0.0 && tau > 0.0) whole_steps(tau, sc.predictor_dt, "tau");
  if (sc.disturbance && (!(sc.disturbance->delta >= 0.0) || !std::isfinite(sc.disturbance->delta))) {
    throw ValidationError("disturbance delta must be >= 0");
  }
  for (const auto& c : sc.constraints) validate_constraint(sc.spec, c);
  if (sc.plant) {
    if (sc.plant->n() != sc.spec.n() || sc.plant->m() != sc.spec.m()) {
      throw ValidationError("plant override must have the same compartments as the model");
    }
  }
  for (const auto& [t, state] : sc.prehistory) {
    if (!(t < sc.t_start)) throw ValidationError("prehistory times must precede t_start");
    check_dimensions(sc.spec, state);
  }
}

MeasurementBuffer::MeasurementBuffer(std::size_t delay_steps, double t_start, double dt,
                                     ModelState fallback,
                                     const std::vector<std::pair<double, ModelState>>& prehistory)
    : delay_steps_(delay_steps),
      capacity_(delay_steps + 1),
      fallback_(std::move(fallback)),
      before_start_(delay_steps) {
  for (const auto& [t, state] : prehistory) {
    const double back = (t_start - t) / dt;
    const double rounded = std::round(back);
    if (rounded < 1.0 || std::abs(back - rounded) > 1e-6) continue;
    const auto k = static_cast<std::size_t>(rounded) - 1;
    if (k < before_start_.size()) before_start_[k] = state;
  }
}

void MeasurementBuffer::push(const ModelState& state) {
  ring_.push_back(state);
  if (ring_.size() > capacity_) ring_.pop_front();
  ++pushed_;
}

const ModelState& MeasurementBuffer::delayed(std::size_t step) const {
  if (step < delay_steps_) {
    const auto& recorded = before_start_[delay_steps_ - step - 1];
    return recorded ? *recorded : fallback_;
  }
  const std::size_t target = step - delay_steps_;
  const std::size_t oldest = pushed_ - ring_.size();
  if (target < oldest || target >= pushed_) {
    throw Error("measurement buffer lookup outside the buffered window");
  }
  return ring_[target - oldest];
}

namespace {

ModelState axpy(const ModelState& x, double h, const Derivative& d) {
  Vector v = x.values();
  const std::size_t n = x.n();
  for (std::size_t i = 0; i < n; ++i) v[i] += h * d.w_dot[i];
  for (std::size_t j = 0; j < d.z_dot.size(); ++j) v[n + j] += h * d.z_dot[j];
  return ModelState::from_flat(std::move(v), n);
}

// Uniform on [-delta, delta] from the top 53 bits of a 64-bit Mersenne twister,
// whose output sequence is fixed by the standard.
double draw_disturbance(std::mt19937_64& rng, double delta) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return delta * (2.0 * unit - 1.0);
}

}  // namespace

ModelState rk4_step(const ModelSpec& spec, const ModelState& state, double u, double dt) {
  if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
  const Derivative k1 = eval_dynamics(spec, state, u);
  const Derivative k2 = eval_dynamics(spec, axpy(state, dt / 2, k1), u);
  const Derivative k3 = eval_dynamics(spec, axpy(state, dt / 2, k2), u);
  const Derivative k4 = eval_dynamics(spec, axpy(state, dt, k3), u);

  Vector v = state.values();
  const std::size_t n = state.n();
  for (std::size_t k = 0; k < v.size(); ++k) {
    const auto pick = [&](const Derivative& d) { return k < n ? d.w_dot[k] : d.z_dot[k - n]; };
    v[k] += dt / 6.0 * (pick(k1) + 2.0 * pick(k2) + 2.0 * pick(k3) + pick(k4));
    if (!std::isfinite(v[k])) throw IntegrationError("non-finite state after RK4 step", 0);
  }
  return ModelState::from_flat(std::move(v), n);
}

Trajectory simulate(const Scenario& sc) {
  validate_scenario(sc);
  if (sc.guaranteed) {
    const auto report = validate_initial_condition(sc.spec, sc.constraints, sc.state0);
    for (const auto& check : report.checks) {
      if (!check.passed) {
        throw ValidationError("initial condition fails for constraint " +
                              constraint_name(sc.spec, sc.constraints[check.constraint]) +
                              " (margin " + std::to_string(check.margin) + ")");
      }
    }
  }

  const std::size_t steps = static_cast<std::size_t>(std::floor((sc.t_end - sc.t_start) / sc.dt + 1e-9));
  const double tau = feedback_delay(sc.feedback);
  const std::size_t delay_steps = whole_steps(tau, sc.dt, "tau");
  const ModelSpec& plant = sc.plant ? *sc.plant : sc.spec;
  const SafetyController controller(sc.constraints);

  PredictorConfig predictor{tau, sc.predictor_dt > 0.0 ? sc.predictor_dt : sc.dt, controller,
                            sc.control_start};
  MeasurementBuffer buffer(delay_steps, sc.t_start, sc.dt, sc.state0, sc.prehistory);
  std::mt19937_64 rng(sc.disturbance ? sc.disturbance->seed : 0);

  Trajectory traj;
  traj.labels = sc.spec.labels();
  traj.n = sc.spec.n();
  traj.dt = sc.dt;
  for (const auto& c : sc.constraints) traj.constraint_names.push_back(constraint_name(sc.spec, c));
  const std::size_t count = steps + 1;
  traj.times.reserve(count);
  traj.states.reserve(count);
  traj.inputs.reserve(count);
  traj.disturbances.reserve(count);
  traj.applied.reserve(count);
  traj.feedback_states.reserve(count);
  traj.barriers.reserve(count);
  traj.extended.reserve(count);

  ModelState x = sc.state0;
  for (std::size_t k = 0; k <= steps; ++k) {
    const double t = sc.t_start + static_cast<double>(k) * sc.dt;
    buffer.push(x);

    ModelState feedback;
    switch (sc.feedback.index()) {
      case 0: feedback = x; break;
      case 1: feedback = buffer.delayed(k); break;
      default: feedback = predict_state(sc.spec, buffer.delayed(k), predictor, t - tau); break;
    }

    const bool controller_on = t >= sc.control_start - 1e-9 * sc.dt;
    ControlDecision decision;
    if (controller_on) {
      try {
        decision = controller.decide(sc.spec, feedback);
      } catch (const SingularControlError&) {
        decision = ControlDecision{};
        traj.singular_steps.push_back(k);
      }
    }
    const double d = controller_on && sc.disturbance ? draw_disturbance(rng, sc.disturbance->delta) : 0.0;
    const double u_applied = clamp_input(decision.u + d);

    std::vector<double> h, he;
    h.reserve(sc.constraints.size());
    he.reserve(sc.constraints.size());
    for (const auto& c : sc.constraints) {
      h.push_back(barrier_value(sc.spec, c, x));
      he.push_back(c.group == CompartmentGroup::Outlet ? extended_barrier_value(sc.spec, c, x)
                                                       : std::numeric_limits<double>::quiet_NaN());
    }

    traj.times.push_back(t);
    traj.states.push_back(x);
    traj.inputs.push_back(std::move(decision));
    traj.disturbances.push_back(d);
    traj.applied.push_back(u_applied);
    traj.feedback_states.push_back(std::move(feedback));
    traj.barriers.push_back(std::move(h));
    traj.extended.push_back(std::move(he));

    if (k < steps) {
      try {
        x = rk4_step(plant, x, u_applied, sc.dt);
      } catch (const IntegrationError& e) {
        throw IntegrationError(std::string(e.what()) + " at t = " + std::to_string(t), k);
      }
    }
  }
  return traj;
}

bool AuditReport::safe() const noexcept {
  return std::all_of(constraints.begin(), constraints.end(),
                     [](const ConstraintAudit& c) { return c.violations == 0; });
}

AuditReport safety_audit(const Trajectory& traj, const ModelSpec& spec,
                         std::span<const SafetyConstraint> constraints) {
  if (traj.size() == 0) throw ValidationError("cannot audit an empty trajectory");
  AuditReport report;
  for (const auto& c : constraints) {
    ConstraintAudit a;
    a.name = constraint_name(spec, c);
    a.violation_tol = 1e-6 * c.bound;
    a.audit_tol = 1e-6 * c.alpha * c.bound;

    double prev = 0.0;
    for (std::size_t k = 0; k < traj.size(); ++k) {
      const double h = barrier_value(spec, c, traj.states[k]);
      if (h < a.min_barrier) {
        a.min_barrier = h;
        a.min_barrier_time = traj.times[k];
      }
      if (h < 0.0) {
        ++a.negative_samples;
        if (a.negative_times.size() < 100) a.negative_times.push_back(traj.times[k]);
      }
      if (h < -a.violation_tol) ++a.violations;
      if (k > 0) {
        const double dt = traj.times[k] - traj.times[k - 1];
        if ((h - prev) / dt + c.alpha * prev < -a.audit_tol) ++a.rate_failures;
      }
      if (c.group == CompartmentGroup::Outlet) {
        const double he = extended_barrier_value(spec, c, traj.states[k]);
        a.min_extended = a.min_extended ? std::min(*a.min_extended, he) : he;
      }
      prev = h;
    }
    report.constraints.push_back(std::move(a));
  }
  for (std::size_t k = 0; k < traj.size(); ++k) {
    if (!traj.inputs[k].feasible) report.infeasible_times.push_back(traj.times[k]);
  }
  for (std::size_t k : traj.singular_steps) report.singular_times.push_back(traj.times.at(k));
  return report;
}

}  // namespace epiguard
