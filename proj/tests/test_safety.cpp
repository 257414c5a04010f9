#include <doctest.h>

#include <cmath>

#include "epiguard/errors.hpp"
#include "epiguard/safety.hpp"
#include "test_support.hpp"

using namespace epiguard;
using namespace epiguard::testing;

namespace {

ModelState sir_state(double s, double i) { return ModelState::from_flat({s, i, 33e6 - s - i}, 2); }

ModelState sihrd_state(double s, double i, double h, double d) {
  return ModelState::from_flat({s, i, h, 15e6 - s - i - h - d, d}, 2);
}

}  // namespace

TEST_SUITE("safety") {

TEST_CASE("infected bound worked example") {
  const ModelSpec spec = build_sir(kSirFig2);
  const SafetyConstraint c = make_constraint(spec, "I", 2e5, BoundDirection::Upper, 0.02);
  const ControlDecision d = multiplicative_control(spec, c, sir_state(32.9e6, 1e5));
  // 1 - (0.02 * 1e5 + 0.2 * 1e5) / 32900
  CHECK(d.u == doctest::Approx(0.331306990881).epsilon(1e-10));
  CHECK(d.feasible);
  REQUIRE(d.active_constraint.has_value());
  CHECK(*d.active_constraint == 0);
  CHECK(d.barrier_values.at(0) == doctest::Approx(1e5));
}

TEST_CASE("hospital extended barrier worked example") {
  const ModelSpec spec = build_sihrd(kSihrdFig3);
  const SafetyConstraint c = make_constraint(spec, "H", 4e4, BoundDirection::Upper, 0.018, 0.014);
  // -(lambda I - nu H) + alpha (H_max - H) = -(30000 - 14000) + 0.018 * (-60000)
  CHECK(extended_barrier_value(spec, c, sihrd_state(10e6, 1e6, 1e5, 0.0)) ==
        doctest::Approx(-17080.0).epsilon(1e-12));
  CHECK(barrier_value(spec, c, sihrd_state(10e6, 1e6, 1e5, 0.0)) == doctest::Approx(-6e4));
  const SafetyConstraint ci = make_constraint(spec, "I", 2e6);
  CHECK_THROWS_AS(extended_barrier_value(spec, ci, sihrd_state(10e6, 1e6, 1e5, 0.0)), ValidationError);
}

TEST_CASE("generic controller reproduces the SIR closed form") {
  const ModelSpec spec = build_sir(kSirFig2);
  Rng rng(101);
  for (int trial = 0; trial < 1000; ++trial) {
    const double alpha = rng.log_uniform(1e-3, 1.0);
    const double bound = rng.log_uniform(1e3, 1e7);
    const ModelState x = random_sir_state(rng, 33e6);
    const SafetyConstraint c = make_constraint(spec, "I", bound, BoundDirection::Upper, alpha);
    const ControlDecision d = multiplicative_control(spec, c, x);
    CHECK(rel_err(d.u_raw, closed_form_ai(kSirFig2, alpha, bound, x[0], x[1])) <= 1e-9);
  }
}

TEST_CASE("generic controller reproduces the SIHRD closed forms") {
  const ModelSpec spec = build_sihrd(kSihrdFig3);
  Rng rng(202);
  for (int trial = 0; trial < 1000; ++trial) {
    const double alpha = rng.log_uniform(1e-3, 0.5);
    const double alpha_e = rng.log_uniform(1e-3, 0.5);
    const ModelState x = random_sihrd_state(rng, 15e6);
    const double h_max = rng.log_uniform(1e3, 1e6);
    const double d_max = rng.log_uniform(1e4, 1e6);
    const SafetyConstraint ch = make_constraint(spec, "H", h_max, BoundDirection::Upper, alpha, alpha_e);
    const SafetyConstraint cd = make_constraint(spec, "D", d_max, BoundDirection::Upper, alpha, alpha_e);
    const double ah = closed_form_ah(kSihrdFig3, alpha, alpha_e, h_max, x[0], x[1], x[2]);
    const double ad = closed_form_ad(kSihrdFig3, alpha, alpha_e, d_max, x[0], x[1], x[4]);
    CHECK(rel_err(outlet_control(spec, ch, x).u_raw, ah) <= 1e-9);
    CHECK(rel_err(outlet_control(spec, cd, x).u_raw, ad) <= 1e-9);
  }
}

TEST_CASE("closed-form controller agrees with a brute-force grid search") {
  const double res = 1e-5;
  Rng rng(303);
  const ModelSpec sir = build_sir(kSirFig2);
  const ModelSpec sihrd = build_sihrd(kSihrdFig3);
  int compared = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const bool outlet = trial % 2 == 1;
    const ModelSpec& spec = outlet ? sihrd : sir;
    const ModelState x = outlet ? random_sihrd_state(rng, 15e6) : random_sir_state(rng, 33e6);
    const std::string label = outlet ? rng.pick(std::vector<std::string>{"H", "D"}) : "I";
    const SafetyConstraint c =
        make_constraint(spec, label, rng.log_uniform(1e3, 1e6), BoundDirection::Upper,
                        rng.log_uniform(1e-3, 0.3), rng.log_uniform(1e-3, 0.3));
    const SafetyConstraint cs[] = {c};
    const ControlDecision d = SafetyController({c}).decide(spec, x);
    const auto oracle = qp_oracle(spec, cs, x, res);
    if (d.u_raw <= 1.0) {
      REQUIRE(oracle.has_value());
      CHECK(std::abs(*oracle - d.u) <= res + 1e-9);
      ++compared;
    } else if (d.u_raw > 1.0 + 1e-6) {
      CHECK_FALSE(oracle.has_value());
    }
  }
  CHECK(compared > 100);
}

TEST_CASE("combined controller agrees with the grid search") {
  const ModelSpec spec = build_sihrd(kSihrdFig3);
  Rng rng(404);
  for (int trial = 0; trial < 200; ++trial) {
    const ModelState x = random_sihrd_state(rng, 15e6);
    const std::vector<SafetyConstraint> cs = {
        make_constraint(spec, "H", rng.log_uniform(1e3, 1e6), BoundDirection::Upper, 0.018, 0.014),
        make_constraint(spec, "D", rng.log_uniform(1e4, 1e6), BoundDirection::Upper, 0.018, 0.018),
        make_constraint(spec, "I", rng.log_uniform(1e3, 1e6), BoundDirection::Upper, 0.02)};
    const ControlDecision d = combined_control(spec, cs, x);
    double expect = 0.0;
    std::size_t arg = 0;
    for (std::size_t k = 0; k < cs.size(); ++k) {
      const double uk = SafetyController({cs[k]}).decide(spec, x).u_raw;
      if (uk > expect) {
        expect = uk;
        arg = k;
      }
    }
    CHECK(d.u_raw == doctest::Approx(expect).epsilon(1e-14));
    if (expect > 0.0) CHECK(d.active_constraint == arg);
    if (d.u_raw <= 1.0) {
      const auto oracle = qp_oracle(spec, cs, x, 1e-5);
      REQUIRE(oracle.has_value());
      CHECK(std::abs(*oracle - d.u) <= 1e-5 + 1e-9);
    }
  }
}

TEST_CASE("ties go to the lowest index") {
  const ModelSpec spec = build_sir(kSirFig2);
  const SafetyConstraint c = make_constraint(spec, "I", 2e5, BoundDirection::Upper, 0.02);
  const std::vector<SafetyConstraint> cs = {c, c};
  const ControlDecision d = combined_control(spec, cs, sir_state(32.9e6, 1e5));
  CHECK(d.active_constraint == 0u);
}

TEST_CASE("controller output is nonnegative under the sign assumption") {
  Rng rng(505);
  const ModelSpec spec = build_sir(kSirFig2);
  for (int trial = 0; trial < 2000; ++trial) {
    const ModelState x = random_sir_state(rng, 33e6);
    const SafetyConstraint c =
        make_constraint(spec, "I", rng.log_uniform(1e2, 3e7), BoundDirection::Upper, rng.log_uniform(1e-4, 2.0));
    const SafetyConstraint cs[] = {c};
    REQUIRE(sign_assumption_check(spec, cs, x));
    const ControlDecision d = multiplicative_control(spec, c, x);
    CHECK(d.u_raw >= 0.0);
    CHECK(d.u >= 0.0);
    CHECK(d.u <= 1.0);
    CHECK(d.feasible == (d.u_raw <= 1.0));
    // The clamped input satisfies the barrier inequality whenever it is feasible.
    const BarrierCondition cond = barrier_condition(spec, c, x);
    if (d.feasible) CHECK(cond.slack(d.u) >= -1e-9 * std::max(1.0, std::abs(cond.phi)));
  }
}

TEST_CASE("a larger alpha never asks for more intervention inside the safe set") {
  Rng rng(606);
  const ModelSpec spec = build_sir(kSirFig2);
  for (int trial = 0; trial < 1000; ++trial) {
    const ModelState x = random_sir_state(rng, 33e6);
    const double bound = x[1] * rng.uniform(1.0, 10.0);
    const double a1 = rng.log_uniform(1e-3, 1.0);
    const double a2 = a1 * rng.uniform(1.0, 5.0);
    const double u1 = multiplicative_control(spec, make_constraint(spec, "I", bound, BoundDirection::Upper, a1), x).u_raw;
    const double u2 = multiplicative_control(spec, make_constraint(spec, "I", bound, BoundDirection::Upper, a2), x).u_raw;
    CHECK(u2 <= u1 + 1e-12);
  }
}

TEST_CASE("lower bounds flip orientation") {
  const ModelSpec spec = build_sir(kSirFig2);
  const ModelState x = sir_state(20e6, 1e5);
  const SafetyConstraint upper = make_constraint(spec, "I", 2e5, BoundDirection::Upper, 0.02);
  const SafetyConstraint lower = make_constraint(spec, "I", 5e4, BoundDirection::Lower, 0.02);
  CHECK(barrier_value(spec, upper, x) == doctest::Approx(1e5));
  CHECK(barrier_value(spec, lower, x) == doctest::Approx(5e4));
  CHECK(barrier_condition(spec, upper, x).authority < 0.0);
  CHECK(barrier_condition(spec, lower, x).authority > 0.0);
  CHECK(constraint_name(spec, lower) == "I_lower");

  // A lower bound on I is opposed by isolation: the combination rule does not apply.
  const std::vector<SafetyConstraint> both = {upper, lower};
  CHECK_FALSE(sign_assumption_check(spec, both, x));
  CHECK_THROWS_AS(combined_control(spec, both, x), AssumptionViolation);
}

TEST_CASE("zero infections leave the controller without authority") {
  const ModelSpec spec = build_sir(kSirFig2);
  const SafetyConstraint c = make_constraint(spec, "I", 2e5);
  const ModelState x = sir_state(30e6, 0.0);
  CHECK_THROWS_AS(multiplicative_control(spec, c, x), SingularControlError);
  const std::vector<SafetyConstraint> cs = {c};
  CHECK_THROWS_AS(combined_control(spec, cs, x), SingularControlError);
}

TEST_CASE("constraint validation") {
  const ModelSpec sir = build_sir(kSirFig2);
  CHECK_THROWS_AS(make_constraint(sir, "I", 0.0), ValidationError);
  CHECK_THROWS_AS(make_constraint(sir, "I", -1.0), ValidationError);
  CHECK_THROWS_AS(make_constraint(sir, "X", 1.0), ValidationError);
  SafetyConstraint bad = make_constraint(sir, "I", 1e5);
  bad.index = 7;
  CHECK_THROWS_AS(validate_constraint(sir, bad), ValidationError);

  // Default gains: gamma / 10, and the infected outflow rate / 10 for outlets.
  CHECK(make_constraint(sir, "I", 1e5).alpha == doctest::Approx(0.02));
  const ModelSpec sihrd = build_sihrd(kSihrdFig3);
  const SafetyConstraint h = make_constraint(sihrd, "H", 4e4);
  CHECK(h.group == CompartmentGroup::Outlet);
  CHECK(h.alpha == doctest::Approx(0.018));
  CHECK(h.alpha_e == doctest::Approx(0.018));
}

TEST_CASE("initial condition report") {
  const ModelSpec spec = build_sihrd(kSihrdFig3);
  const std::vector<SafetyConstraint> cs = {make_constraint(spec, "H", 4e4, BoundDirection::Upper, 0.018, 0.014)};
  // H below its bound but rising fast: h >= 0, h^e < 0.
  const InitialConditionReport rising = validate_initial_condition(spec, cs, sihrd_state(10e6, 1e6, 3e4, 0.0));
  CHECK_FALSE(rising.all_passed());
  CHECK(rising.checks[0].barrier > 0.0);
  REQUIRE(rising.checks[0].extended.has_value());
  CHECK(*rising.checks[0].extended < 0.0);
  CHECK(rising.checks[0].margin == *rising.checks[0].extended);

  const InitialConditionReport calm = validate_initial_condition(spec, cs, sihrd_state(7e6, 3e4, 7e3, 1.2e5));
  CHECK(calm.all_passed());
}

TEST_CASE("empty controller leaves the input off") {
  const ModelSpec spec = build_sir(kSirFig2);
  const ControlDecision d = SafetyController{}.decide(spec, sir_state(30e6, 1e6));
  CHECK(d.u == 0.0);
  CHECK_FALSE(d.active_constraint.has_value());
}

}  // TEST_SUITE
