#include "epiguard/safety.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "epiguard/errors.hpp"

namespace epiguard {

const char* to_string(CompartmentGroup group) {
  return group == CompartmentGroup::Multiplicative ? "multiplicative" : "outlet";
}

const char* to_string(BoundDirection direction) {
  return direction == BoundDirection::Upper ? "upper" : "lower";
}

Gains default_gains(const ModelSpec& spec, CompartmentGroup group) {
  if (group == CompartmentGroup::Multiplicative) {
    const double gamma = std::visit([](const auto& p) { return p.gamma; }, spec.params());
    return {gamma / 10.0, 0.0};
  }
  const double rate = spec.infected_outflow_rate() / 10.0;
  return {rate, rate};
}

SafetyConstraint make_constraint(const ModelSpec& spec, const std::string& label, double bound,
                                 BoundDirection direction, double alpha, double alpha_e) {
  const std::size_t flat = spec.index_of(label);
  SafetyConstraint c;
  if (flat < spec.n()) {
    c.group = CompartmentGroup::Multiplicative;
    c.index = flat;
  } else {
    c.group = CompartmentGroup::Outlet;
    c.index = flat - spec.n();
  }
  const Gains defaults = default_gains(spec, c.group);
  c.bound = bound;
  c.direction = direction;
  c.alpha = alpha > 0.0 ? alpha : defaults.alpha;
  c.alpha_e = c.group == CompartmentGroup::Outlet ? (alpha_e > 0.0 ? alpha_e : defaults.alpha_e) : 0.0;
  validate_constraint(spec, c);
  return c;
}

void validate_constraint(const ModelSpec& spec, const SafetyConstraint& c) {
  const std::size_t limit = c.group == CompartmentGroup::Multiplicative ? spec.n() : spec.m();
  if (c.index >= limit) {
    throw ValidationError(std::string("constraint index out of range for ") + to_string(c.group) +
                          " compartments");
  }
  if (!(c.bound > 0.0) || !std::isfinite(c.bound)) throw ValidationError("constraint bound must be > 0");
  if (!(c.alpha > 0.0) || !std::isfinite(c.alpha)) throw ValidationError("constraint alpha must be > 0");
  if (c.group == CompartmentGroup::Outlet && (!(c.alpha_e > 0.0) || !std::isfinite(c.alpha_e))) {
    throw ValidationError("outlet constraint alpha_e must be > 0");
  }
}

std::string constraint_name(const ModelSpec& spec, const SafetyConstraint& c) {
  std::string name = spec.labels().at(c.flat_index(spec));
  if (c.direction == BoundDirection::Lower) name += "_lower";
  return name;
}

double singular_tolerance(const ModelSpec& spec) noexcept { return 1e-12 * spec.beta0(); }

double clamp_input(double u) noexcept { return std::clamp(u, 0.0, 1.0); }

double barrier_value(const ModelSpec& spec, const SafetyConstraint& c, const ModelState& state) {
  check_dimensions(spec, state);
  validate_constraint(spec, c);
  return c.orientation() * (c.bound - state[c.flat_index(spec)]);
}

double extended_barrier_value(const ModelSpec& spec, const SafetyConstraint& c,
                              const ModelState& state) {
  if (c.group != CompartmentGroup::Outlet) {
    throw ValidationError("extended barrier is defined for outlet constraints only");
  }
  const double h = barrier_value(spec, c, state);
  const double inflow = spec.outlet_inflow(state.w())[c.index] + spec.outlet_drift(state.z())[c.index];
  return -c.orientation() * inflow + c.alpha * h;
}

double BarrierCondition::min_norm_input() const noexcept {
  const double sign = authority > 0.0 ? 1.0 : (authority < 0.0 ? -1.0 : 0.0);
  return -sign * std::max(0.0, phi / std::abs(authority));
}

BarrierCondition barrier_condition(const ModelSpec& spec, const SafetyConstraint& c,
                                   const ModelState& state) {
  check_dimensions(spec, state);
  validate_constraint(spec, c);
  const double sigma = c.orientation();
  const auto w = state.w();
  const auto z = state.z();
  const Vector f = spec.drift(w);
  const Vector g = spec.control_gain(w);

  BarrierCondition out;
  if (c.group == CompartmentGroup::Multiplicative) {
    const std::size_t i = c.index;
    out.phi = sigma * (f[i] - c.alpha * (c.bound - w[i]));
    out.authority = sigma * g[i];
    return out;
  }

  const std::size_t j = c.index;
  const Vector q = spec.outlet_inflow(w);
  const Vector r = spec.outlet_drift(z);
  const Matrix dq = spec.inflow_jacobian(w);
  const Matrix dr = spec.outlet_jacobian(z);
  Vector z_dot(q.size());
  for (std::size_t k = 0; k < q.size(); ++k) z_dot[k] = q[k] + r[k];

  const double phi_upper = dq.row_dot(j, f) + dr.row_dot(j, z_dot) +
                           (c.alpha + c.alpha_e) * z_dot[j] -
                           c.alpha_e * c.alpha * (c.bound - z[j]);
  out.phi = sigma * phi_upper;
  out.authority = sigma * dq.row_dot(j, g);
  return out;
}

namespace {

BarrierCondition nonsingular_condition(const ModelSpec& spec, const SafetyConstraint& c,
                                       const ModelState& state) {
  const BarrierCondition cond = barrier_condition(spec, c, state);
  if (!(std::abs(cond.authority) >= singular_tolerance(spec))) {
    throw SingularControlError("no control authority over " + constraint_name(spec, c) +
                               " (|authority| = " + std::to_string(std::abs(cond.authority)) + ")");
  }
  return cond;
}

void record_barriers(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                     const ModelState& state, ControlDecision& d) {
  d.barrier_values.clear();
  d.extended_values.clear();
  for (const auto& c : constraints) {
    d.barrier_values.push_back(barrier_value(spec, c, state));
    d.extended_values.push_back(c.group == CompartmentGroup::Outlet
                                    ? extended_barrier_value(spec, c, state)
                                    : std::numeric_limits<double>::quiet_NaN());
  }
}

void finish(ControlDecision& d) {
  d.u = clamp_input(d.u_raw);
  d.feasible = d.u_raw >= 0.0 && d.u_raw <= 1.0;
}

ControlDecision single_control(const ModelSpec& spec, const SafetyConstraint& c,
                               const ModelState& state, CompartmentGroup expected) {
  if (c.group != expected) {
    throw ValidationError(std::string("expected a ") + to_string(expected) + " constraint");
  }
  ControlDecision d;
  d.u_raw = nonsingular_condition(spec, c, state).min_norm_input();
  if (d.u_raw > 0.0) d.active_constraint = 0;
  finish(d);
  record_barriers(spec, std::span(&c, 1), state, d);
  return d;
}

}  // namespace

ControlDecision multiplicative_control(const ModelSpec& spec, const SafetyConstraint& c,
                                       const ModelState& state) {
  return single_control(spec, c, state, CompartmentGroup::Multiplicative);
}

ControlDecision outlet_control(const ModelSpec& spec, const SafetyConstraint& c,
                               const ModelState& state) {
  return single_control(spec, c, state, CompartmentGroup::Outlet);
}

bool sign_assumption_check(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                           const ModelState& state) {
  return std::all_of(constraints.begin(), constraints.end(), [&](const SafetyConstraint& c) {
    return barrier_condition(spec, c, state).authority < 0.0;
  });
}

ControlDecision combined_control(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                                 const ModelState& state) {
  if (constraints.empty()) throw ValidationError("combined control needs at least one constraint");
  std::vector<double> inputs;
  inputs.reserve(constraints.size());
  for (const auto& c : constraints) {
    const BarrierCondition cond = nonsingular_condition(spec, c, state);
    if (!(cond.authority < 0.0)) {
      throw AssumptionViolation("constraint " + constraint_name(spec, c) +
                                " has non-negative control authority; the max-combination does "
                                "not apply (infeasible by this method, needs a numeric QP)");
    }
    inputs.push_back(cond.min_norm_input());
  }

  ControlDecision d;
  // max_element returns the first maximum, which is the lowest index on ties.
  const auto best = std::max_element(inputs.begin(), inputs.end());
  d.u_raw = *best;
  if (d.u_raw > 0.0) d.active_constraint = static_cast<std::size_t>(best - inputs.begin());
  finish(d);
  record_barriers(spec, constraints, state, d);
  return d;
}

bool InitialConditionReport::all_passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const ConditionCheck& c) { return c.passed; });
}

InitialConditionReport validate_initial_condition(const ModelSpec& spec,
                                                  std::span<const SafetyConstraint> constraints,
                                                  const ModelState& state0) {
  InitialConditionReport report;
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const auto& c = constraints[k];
    ConditionCheck check;
    check.constraint = k;
    check.barrier = barrier_value(spec, c, state0);
    check.margin = check.barrier;
    if (c.group == CompartmentGroup::Outlet) {
      check.extended = extended_barrier_value(spec, c, state0);
      check.margin = std::min(check.margin, *check.extended);
    }
    check.passed = check.margin >= 0.0;
    report.checks.push_back(check);
  }
  return report;
}

namespace {

// Left-hand side of hdot + alpha h >= 0 (multiplicative) or
// hedot + alpha_e he >= 0 (outlet), evaluated from the dynamics at input u.
double barrier_rate_margin(const ModelSpec& spec, const SafetyConstraint& c, const ModelState& state,
                           const Jacobians& jac, double u) {
  const double sigma = c.orientation();
  const Derivative d = eval_dynamics(spec, state, u);
  if (c.group == CompartmentGroup::Multiplicative) {
    const double h = sigma * (c.bound - state[c.flat_index(spec)]);
    const double h_dot = -sigma * d.w_dot[c.index];
    return h_dot + c.alpha * h;
  }
  const std::size_t j = c.index;
  const double h = sigma * (c.bound - state.z()[j]);
  const double h_dot = -sigma * d.z_dot[j];
  const double he = h_dot + c.alpha * h;
  // d/dt of z_dot[j] = dq_j/dw . w_dot + dr_j/dz . z_dot
  const double z_ddot = jac.inflow.row_dot(j, d.w_dot) + jac.outlet.row_dot(j, d.z_dot);
  const double he_dot = -sigma * z_ddot + c.alpha * h_dot;
  return he_dot + c.alpha_e * he;
}

}  // namespace

std::optional<double> qp_oracle(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                                const ModelState& state, double resolution) {
  if (!(resolution > 0.0)) throw ValidationError("grid resolution must be > 0");
  for (const auto& c : constraints) validate_constraint(spec, c);
  const Jacobians jac = eval_jacobians(spec, state);

  // Rounding slack relative to the size of the inequality terms.
  std::vector<double> slack(constraints.size());
  for (std::size_t k = 0; k < constraints.size(); ++k) {
    const double lo = barrier_rate_margin(spec, constraints[k], state, jac, 0.0);
    const double hi = barrier_rate_margin(spec, constraints[k], state, jac, 1.0);
    slack[k] = 1e-9 * std::max({std::abs(lo), std::abs(hi), 1.0});
  }

  const auto steps = static_cast<std::size_t>(std::floor(1.0 / resolution + 1e-9));
  for (std::size_t s = 0; s <= steps; ++s) {
    const double u = static_cast<double>(s) * resolution;
    bool ok = true;
    for (std::size_t k = 0; k < constraints.size() && ok; ++k) {
      ok = barrier_rate_margin(spec, constraints[k], state, jac, u) >= -slack[k];
    }
    if (ok) return u;
  }
  return std::nullopt;
}

ControlDecision SafetyController::decide(const ModelSpec& spec, const ModelState& state) const {
  if (constraints_.empty()) {
    ControlDecision d;
    return d;
  }
  if (constraints_.size() == 1) {
    const auto& c = constraints_.front();
    return c.group == CompartmentGroup::Multiplicative ? multiplicative_control(spec, c, state)
                                                       : outlet_control(spec, c, state);
  }
  return combined_control(spec, constraints_, state);
}

}  // namespace epiguard
