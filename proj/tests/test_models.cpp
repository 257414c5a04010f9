#include <doctest.h>

#include <cmath>
#include <numeric>

#include "epiguard/errors.hpp"
#include "epiguard/models.hpp"
#include "test_support.hpp"

using namespace epiguard;
using namespace epiguard::testing;

namespace {

double derivative_sum(const Derivative& d) {
  return std::accumulate(d.w_dot.begin(), d.w_dot.end(), 0.0) + std::accumulate(d.z_dot.begin(), d.z_dot.end(), 0.0);
}

std::vector<ModelSpec> builtin_models() {
  return {build_sir(kSirFig2), build_seir({0.33, 0.2, 0.2, 33e6}), build_sihrd(kSihrdFig3)};
}

ModelState random_state(Rng& rng, const ModelSpec& spec) {
  Vector v(spec.labels().size());
  for (double& x : v) x = rng.uniform(0.0, spec.population());
  return ModelState::from_flat(std::move(v), spec.n());
}

}  // namespace

TEST_SUITE("models") {

TEST_CASE("SIR construction and dimensions") {
  const ModelSpec spec = build_sir(kSirFig2);
  CHECK(spec.n() == 2);
  CHECK(spec.m() == 1);
  CHECK(spec.labels() == std::vector<std::string>{"S", "I", "R"});
  CHECK(spec.kind() == ModelKind::Sir);
  CHECK_THROWS_AS(build_sir({0.0, 0.2, 33e6}), ValidationError);
  CHECK_THROWS_AS(build_sir({0.33, -0.2, 33e6}), ValidationError);
  CHECK_THROWS_AS(build_sir({0.33, 0.2, 0.0}), ValidationError);
}

TEST_CASE("SIR derivative by hand") {
  // beta0 S I / N = 0.33 * 30e6 * 3e6 / 33e6 = 900000; gamma I = 600000.
  const ModelSpec spec = build_sir(kSirFig2);
  const Derivative d = eval_dynamics(spec, ModelState::from_flat({30e6, 3e6, 0.0}, 2), 0.0);
  CHECK(d.w_dot[0] == doctest::Approx(-900000.0).epsilon(1e-12));
  CHECK(d.w_dot[1] == doctest::Approx(300000.0).epsilon(1e-12));
  CHECK(d.z_dot[0] == doctest::Approx(600000.0).epsilon(1e-12));
}

TEST_CASE("total isolation cancels transmission") {
  const ModelSpec spec = build_sir(kSirFig2);
  const Derivative d = eval_dynamics(spec, ModelState::from_flat({12e6, 4e5, 1e6}, 2), 1.0);
  CHECK(d.w_dot[0] == doctest::Approx(0.0).scale(1.0));
  CHECK(d.w_dot[1] == doctest::Approx(-0.2 * 4e5));

  Rng rng(11);
  for (const auto& m : builtin_models()) {
    for (int k = 0; k < 50; ++k) {
      const Derivative iso = eval_dynamics(m, random_state(rng, m), 1.0);
      CHECK(std::abs(iso.w_dot[0]) <= 1e-9 * m.population());
    }
  }
}

TEST_CASE("SEIR structure") {
  const ModelSpec spec = build_seir({0.33, 0.2, 0.2, 33e6});
  CHECK(spec.n() == 3);
  CHECK(spec.m() == 1);
  const Vector g = spec.control_gain(std::vector<double>{30e6, 1e6, 3e6});
  CHECK(g[0] == doctest::Approx(900000.0));
  CHECK(g[1] == doctest::Approx(-900000.0));
  CHECK(g[2] == 0.0);

  const Vector zero_f = spec.drift(std::vector<double>{30e6, 0.0, 0.0});
  const Vector zero_g = spec.control_gain(std::vector<double>{30e6, 0.0, 0.0});
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(zero_f[i] == 0.0);
    CHECK(zero_g[i] == 0.0);
  }

  // E' = 900000 - sigma E = 900000 - 200000.
  const Derivative d = eval_dynamics(spec, ModelState::from_flat({30e6, 1e6, 3e6, 0.0}, 3), 0.0);
  CHECK(d.w_dot[1] == doctest::Approx(700000.0).epsilon(1e-12));
  CHECK_THROWS_AS(build_seir({0.33, 0.2, 0.0, 33e6}), ValidationError);
}

TEST_CASE("SIHRD structure") {
  const ModelSpec spec = build_sihrd(kSihrdFig3);
  CHECK(spec.n() == 2);
  CHECK(spec.m() == 3);
  CHECK(spec.labels() == std::vector<std::string>{"S", "I", "H", "R", "D"});

  const ModelState empty = ModelState::from_flat({15e6, 0.0, 0.0, 0.0, 0.0}, 2);
  for (double q : spec.outlet_inflow(empty.w())) CHECK(q == 0.0);
  for (double r : spec.outlet_drift(empty.z())) CHECK(r == 0.0);

  // H' = lambda I - nu H = 30000 - 14000.
  const Derivative d = eval_dynamics(spec, ModelState::from_flat({10e6, 1e6, 1e5, 0.0, 0.0}, 2), 0.0);
  CHECK(d.z_dot[0] == doctest::Approx(16000.0).epsilon(1e-12));
  CHECK_THROWS_AS(build_sihrd({0.53, 0.14, 0.03, 0.14, 0.0, 15e6}), ValidationError);
}

TEST_CASE("analytic Jacobians") {
  const ModelSpec sihrd = build_sihrd(kSihrdFig3);
  const Jacobians j = eval_jacobians(sihrd, ModelState::from_flat({1e6, 2e5, 3e4, 0.0, 1e3}, 2));
  CHECK(j.inflow(0, 0) == 0.0);
  CHECK(j.inflow(0, 1) == 0.03);
  CHECK(j.inflow(1, 1) == 0.14);
  CHECK(j.inflow(2, 1) == 0.01);
  CHECK(j.outlet(0, 0) == -0.14);
  CHECK(j.outlet(1, 0) == 0.14);
  CHECK(j.outlet(2, 2) == 0.0);

  const ModelSpec sir = build_sir(kSirFig2);
  const Jacobians js = eval_jacobians(sir, ModelState::from_flat({1e6, 2e5, 0.0}, 2));
  CHECK(js.inflow(0, 0) == 0.0);
  CHECK(js.inflow(0, 1) == 0.2);
  CHECK(js.outlet(0, 0) == 0.0);
}

TEST_CASE("Jacobians match central differences") {
  Rng rng(5);
  for (const auto& spec : builtin_models()) {
    for (int trial = 0; trial < 100; ++trial) {
      const ModelState x = random_state(rng, spec);
      const Jacobians an = eval_jacobians(spec, x);
      for (std::size_t col = 0; col < spec.n(); ++col) {
        const double step = 1e-4 * std::max(1.0, std::abs(x.w()[col]));
        Vector plus(x.w().begin(), x.w().end()), minus = plus;
        plus[col] += step;
        minus[col] -= step;
        const Vector qp = spec.outlet_inflow(plus), qm = spec.outlet_inflow(minus);
        for (std::size_t row = 0; row < spec.m(); ++row) {
          const double fd = (qp[row] - qm[row]) / (2 * step);
          CHECK(std::abs(fd - an.inflow(row, col)) <= 1e-6 * std::abs(an.inflow(row, col)) + 1e-12);
        }
      }
      for (std::size_t col = 0; col < spec.m(); ++col) {
        const double step = 1e-4 * std::max(1.0, std::abs(x.z()[col]));
        Vector plus(x.z().begin(), x.z().end()), minus = plus;
        plus[col] += step;
        minus[col] -= step;
        const Vector rp = spec.outlet_drift(plus), rm = spec.outlet_drift(minus);
        for (std::size_t row = 0; row < spec.m(); ++row) {
          const double fd = (rp[row] - rm[row]) / (2 * step);
          CHECK(std::abs(fd - an.outlet(row, col)) <= 1e-6 * std::abs(an.outlet(row, col)) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("population is conserved by the dynamics") {
  Rng rng(1234);
  for (const auto& spec : builtin_models()) {
    for (int trial = 0; trial < 500; ++trial) {
      const double u = rng.uniform(0.0, 1.0);
      const Derivative d = eval_dynamics(spec, random_state(rng, spec), u);
      CHECK(std::abs(derivative_sum(d)) <= 1e-9 * spec.population());
    }
  }
  const ModelSpec sihrd = build_sihrd(kSihrdFig3);
  const Derivative d = eval_dynamics(sihrd, ModelState::from_flat({9e6, 2e5, 3e4, 5e6, 1e5}, 2), 0.0);
  CHECK(derivative_sum(d) == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("dimension mismatch is rejected") {
  const ModelSpec sir = build_sir(kSirFig2);
  CHECK_THROWS_AS(eval_dynamics(sir, ModelState::from_flat({1.0, 2.0, 3.0, 4.0}, 2), 0.0), ValidationError);
  CHECK_THROWS_AS(eval_jacobians(sir, ModelState::from_flat({1.0, 2.0, 3.0}, 1)), ValidationError);
  CHECK_THROWS_AS(validate_initial_state(sir, ModelState::from_flat({1.0, -2.0, 3.0}, 2)), ValidationError);
  CHECK_NOTHROW(validate_initial_state(sir, ModelState::from_flat({1.0, 0.0, 3.0}, 2)));
  CHECK_THROWS_AS(sir.index_of("H"), ValidationError);
}

TEST_CASE("reporting clamp leaves dynamics untouched") {
  const ModelState drifted = ModelState::from_flat({10.0, -1e-9, 5.0}, 2);
  const ModelState shown = clamp_for_report(drifted);
  CHECK(shown[1] == 0.0);
  CHECK(drifted[1] < 0.0);
}

}  // TEST_SUITE
