#pragma once

// Min-norm safety filters for the compartmental models.
//
// Every constraint reduces to one scalar inequality in the input,
//
//     -phi(x) - b(x) u >= 0,
//
// where b is the control authority (g_i for a multiplicative compartment,
// L_g q_j = dq_j/dw . g for an outlet compartment through its extended
// barrier). The minimum-norm solution is u = -sign(b) ReLU(phi / |b|).
// Admissible inputs are U = [0, 1]; the raw solution is clamped and flagged.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "epiguard/models.hpp"

namespace epiguard {

enum class CompartmentGroup { Multiplicative, Outlet };
enum class BoundDirection { Upper, Lower };

const char* to_string(CompartmentGroup group);
const char* to_string(BoundDirection direction);

struct SafetyConstraint {
  CompartmentGroup group = CompartmentGroup::Multiplicative;
  std::size_t index = 0;  ///< position within w (multiplicative) or z (outlet), 0-based
  double bound = 0.0;     ///< C, persons
  BoundDirection direction = BoundDirection::Upper;
  double alpha = 0.0;    ///< 1/day
  double alpha_e = 0.0;  ///< 1/day, outlet only

  /// +1 for an upper bound (h = C - v), -1 for a lower bound (h = v - C).
  double orientation() const noexcept { return direction == BoundDirection::Upper ? 1.0 : -1.0; }
  /// Index into the flat state vector.
  std::size_t flat_index(const ModelSpec& spec) const noexcept {
    return group == CompartmentGroup::Multiplicative ? index : spec.n() + index;
  }

  friend bool operator==(const SafetyConstraint&, const SafetyConstraint&) = default;
};

/// Builds a constraint on the compartment named `label`. Non-positive gains
/// fall back to default_gains().
SafetyConstraint make_constraint(const ModelSpec& spec, const std::string& label, double bound,
                                 BoundDirection direction = BoundDirection::Upper,
                                 double alpha = 0.0, double alpha_e = 0.0);

struct Gains {
  double alpha;
  double alpha_e;
};

/// gamma/10 for multiplicative compartments; (infected outflow rate)/10 for both
/// outlet gains.
Gains default_gains(const ModelSpec& spec, CompartmentGroup group);

void validate_constraint(const ModelSpec& spec, const SafetyConstraint& c);

std::string constraint_name(const ModelSpec& spec, const SafetyConstraint& c);

/// Singularity tolerance for the control authority, 1e-12 * beta0.
double singular_tolerance(const ModelSpec& spec) noexcept;

struct ControlDecision {
  double u_raw = 0.0;  ///< unclamped min-norm solution
  double u = 0.0;      ///< clamp(u_raw, 0, 1)
  std::optional<std::size_t> active_constraint;
  bool feasible = true;  ///< u_raw lies in [0, 1]
  std::vector<double> barrier_values;   ///< h per constraint
  std::vector<double> extended_values;  ///< h^e per constraint (NaN for multiplicative)
};

double clamp_input(double u) noexcept;

/// h(x); positive inside the safe set.
double barrier_value(const ModelSpec& spec, const SafetyConstraint& c, const ModelState& state);

/// h^e(x) = hdot(x) + alpha h(x) for an outlet constraint.
double extended_barrier_value(const ModelSpec& spec, const SafetyConstraint& c,
                              const ModelState& state);

/// The scalar inequality -phi - authority * u >= 0 for one constraint.
struct BarrierCondition {
  double phi = 0.0;
  double authority = 0.0;

  /// -sign(authority) ReLU(phi / |authority|).
  double min_norm_input() const noexcept;
  double slack(double u) const noexcept { return -phi - authority * u; }
};

/// phi and control authority with the bound orientation folded in.
BarrierCondition barrier_condition(const ModelSpec& spec, const SafetyConstraint& c,
                                   const ModelState& state);

ControlDecision multiplicative_control(const ModelSpec& spec, const SafetyConstraint& c,
                                       const ModelState& state);
ControlDecision outlet_control(const ModelSpec& spec, const SafetyConstraint& c,
                               const ModelState& state);

/// Pointwise maximum of the constituent controllers; ties go to the lowest index.
ControlDecision combined_control(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                                 const ModelState& state);

/// True iff every constraint's oriented control authority is strictly negative.
bool sign_assumption_check(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                           const ModelState& state);

struct ConditionCheck {
  std::size_t constraint = 0;
  bool passed = true;
  double barrier = 0.0;
  std::optional<double> extended;  ///< outlet constraints only
  double margin = 0.0;             ///< min(h, h^e); negative means failure
};

struct InitialConditionReport {
  std::vector<ConditionCheck> checks;
  bool all_passed() const noexcept;
};

/// h(x0) >= 0 for every constraint, plus h^e(x0) >= 0 for outlet constraints.
InitialConditionReport validate_initial_condition(const ModelSpec& spec,
                                                  std::span<const SafetyConstraint> constraints,
                                                  const ModelState& state0);

/// Brute-force min-norm reference: scans u = k * resolution on [0, 1] and
/// returns the smallest u satisfying every barrier inequality, evaluated
/// directly from the dynamics. std::nullopt when no grid point is feasible.
std::optional<double> qp_oracle(const ModelSpec& spec, std::span<const SafetyConstraint> constraints,
                                const ModelState& state, double resolution);

/// Controller configuration used in closed loop: no constraints gives u = 0,
/// one constraint uses its own controller, several use combined_control.
class SafetyController {
 public:
  SafetyController() = default;
  explicit SafetyController(std::vector<SafetyConstraint> constraints)
      : constraints_(std::move(constraints)) {}

  const std::vector<SafetyConstraint>& constraints() const noexcept { return constraints_; }
  ControlDecision decide(const ModelSpec& spec, const ModelState& state) const;

 private:
  std::vector<SafetyConstraint> constraints_;
};

}  // namespace epiguard
