#include "epiguard/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "epiguard/errors.hpp"

namespace epiguard {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_positive(double value, const char* name) {
  if (!(value > 0.0) || !std::isfinite(value)) {
    throw ValidationError(std::string("model parameter ") + name + " must be finite and > 0, got " +
                          std::to_string(value));
  }
}

// beta0 * S * I / N, the transmission flux.
double transmission(double beta0, double population, double s, double i) {
  return beta0 * s * i / population;
}

}  // namespace

double Matrix::row_dot(std::size_t r, std::span<const double> v) const {
  double acc = 0.0;
  for (std::size_t c = 0; c < cols; ++c) acc += (*this)(r, c) * v[c];
  return acc;
}

ModelState::ModelState(std::span<const double> w, std::span<const double> z) : n_(w.size()) {
  values_.reserve(w.size() + z.size());
  values_.insert(values_.end(), w.begin(), w.end());
  values_.insert(values_.end(), z.begin(), z.end());
}

ModelState ModelState::from_flat(Vector values, std::size_t n) {
  if (n > values.size()) throw ValidationError("state split exceeds state length");
  ModelState s;
  s.values_ = std::move(values);
  s.n_ = n;
  return s;
}

double ModelState::total() const noexcept {
  return std::accumulate(values_.begin(), values_.end(), 0.0);
}

const char* to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Sir: return "sir";
    case ModelKind::Seir: return "seir";
    case ModelKind::Sihrd: return "sihrd";
  }
  return "unknown";
}

ModelSpec::ModelSpec(ModelParams params, std::size_t n, std::size_t m,
                     std::vector<std::string> labels)
    : params_(std::move(params)), n_(n), m_(m), labels_(std::move(labels)) {
  if (n_ < 1 || m_ < 1) throw ValidationError("model needs n >= 1 and m >= 1");
  if (labels_.size() != n_ + m_) throw ValidationError("label count must equal n + m");
  std::set<std::string> unique(labels_.begin(), labels_.end());
  if (unique.size() != labels_.size()) throw ValidationError("duplicate compartment label");
}

ModelSpec build_sir(const SirParams& p) {
  require_positive(p.beta0, "beta0");
  require_positive(p.gamma, "gamma");
  require_positive(p.population, "population");
  return ModelSpec(p, 2, 1, {"S", "I", "R"});
}

ModelSpec build_seir(const SeirParams& p) {
  require_positive(p.beta0, "beta0");
  require_positive(p.gamma, "gamma");
  require_positive(p.sigma, "sigma");
  require_positive(p.population, "population");
  return ModelSpec(p, 3, 1, {"S", "E", "I", "R"});
}

ModelSpec build_sihrd(const SihrdParams& p) {
  require_positive(p.beta0, "beta0");
  require_positive(p.gamma, "gamma");
  require_positive(p.lambda, "lambda");
  require_positive(p.nu, "nu");
  require_positive(p.mu, "mu");
  require_positive(p.population, "population");
  return ModelSpec(p, 2, 3, {"S", "I", "H", "R", "D"});
}

ModelSpec build_model(const ModelParams& params) {
  return std::visit(Overloaded{
                        [](const SirParams& p) { return build_sir(p); },
                        [](const SeirParams& p) { return build_seir(p); },
                        [](const SihrdParams& p) { return build_sihrd(p); },
                    },
                    params);
}

double ModelSpec::beta0() const noexcept {
  return std::visit([](const auto& p) { return p.beta0; }, params_);
}

double ModelSpec::population() const noexcept {
  return std::visit([](const auto& p) { return p.population; }, params_);
}

double ModelSpec::infected_outflow_rate() const noexcept {
  return std::visit(Overloaded{
                        [](const SirParams& p) { return p.gamma; },
                        [](const SeirParams& p) { return p.gamma; },
                        [](const SihrdParams& p) { return p.gamma + p.lambda + p.mu; },
                    },
                    params_);
}

std::size_t ModelSpec::index_of(const std::string& label) const {
  auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) {
    throw ValidationError("unknown compartment '" + label + "' for " + to_string(kind()) + " model");
  }
  return static_cast<std::size_t>(it - labels_.begin());
}

Vector ModelSpec::drift(std::span<const double> w) const {
  return std::visit(
      Overloaded{
          [&](const SirParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[1]);
            return {-flux, flux - p.gamma * w[1]};
          },
          [&](const SeirParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[2]);
            return {-flux, flux - p.sigma * w[1], p.sigma * w[1] - p.gamma * w[2]};
          },
          [&](const SihrdParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[1]);
            return {-flux, flux - (p.gamma + p.lambda + p.mu) * w[1]};
          },
      },
      params_);
}

Vector ModelSpec::control_gain(std::span<const double> w) const {
  return std::visit(
      Overloaded{
          [&](const SirParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[1]);
            return {flux, -flux};
          },
          [&](const SeirParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[2]);
            return {flux, -flux, 0.0};
          },
          [&](const SihrdParams& p) -> Vector {
            const double flux = transmission(p.beta0, p.population, w[0], w[1]);
            return {flux, -flux};
          },
      },
      params_);
}

Vector ModelSpec::outlet_inflow(std::span<const double> w) const {
  return std::visit(Overloaded{
                        [&](const SirParams& p) -> Vector { return {p.gamma * w[1]}; },
                        [&](const SeirParams& p) -> Vector { return {p.gamma * w[2]}; },
                        [&](const SihrdParams& p) -> Vector {
                          return {p.lambda * w[1], p.gamma * w[1], p.mu * w[1]};
                        },
                    },
                    params_);
}

Vector ModelSpec::outlet_drift(std::span<const double> z) const {
  return std::visit(Overloaded{
                        [&](const SirParams&) -> Vector { return {0.0}; },
                        [&](const SeirParams&) -> Vector { return {0.0}; },
                        [&](const SihrdParams& p) -> Vector {
                          return {-p.nu * z[0], p.nu * z[0], 0.0};
                        },
                    },
                    params_);
}

Matrix ModelSpec::inflow_jacobian(std::span<const double>) const {
  Matrix jac(m_, n_);
  std::visit(Overloaded{
                 [&](const SirParams& p) { jac(0, 1) = p.gamma; },
                 [&](const SeirParams& p) { jac(0, 2) = p.gamma; },
                 [&](const SihrdParams& p) {
                   jac(0, 1) = p.lambda;
                   jac(1, 1) = p.gamma;
                   jac(2, 1) = p.mu;
                 },
             },
             params_);
  return jac;
}

Matrix ModelSpec::outlet_jacobian(std::span<const double>) const {
  Matrix jac(m_, m_);
  if (const auto* p = std::get_if<SihrdParams>(&params_)) {
    jac(0, 0) = -p->nu;
    jac(1, 0) = p->nu;
  }
  return jac;
}

void check_dimensions(const ModelSpec& spec, const ModelState& state) {
  if (state.n() != spec.n() || state.m() != spec.m()) {
    throw ValidationError("state dimensions (" + std::to_string(state.n()) + ", " +
                          std::to_string(state.m()) + ") do not match " + to_string(spec.kind()) +
                          " model (" + std::to_string(spec.n()) + ", " + std::to_string(spec.m()) +
                          ")");
  }
}

void validate_initial_state(const ModelSpec& spec, const ModelState& state) {
  check_dimensions(spec, state);
  for (std::size_t k = 0; k < state.size(); ++k) {
    if (!(state[k] >= 0.0) || !std::isfinite(state[k])) {
      throw ValidationError("initial " + spec.labels()[k] + " must be finite and >= 0");
    }
  }
}

Derivative eval_dynamics(const ModelSpec& spec, const ModelState& state, double u) {
  check_dimensions(spec, state);
  const auto w = state.w();
  Derivative d{spec.drift(w), spec.outlet_inflow(w)};
  const Vector gain = spec.control_gain(w);
  for (std::size_t i = 0; i < d.w_dot.size(); ++i) d.w_dot[i] += gain[i] * u;
  const Vector r = spec.outlet_drift(state.z());
  for (std::size_t j = 0; j < d.z_dot.size(); ++j) d.z_dot[j] += r[j];
  return d;
}

Jacobians eval_jacobians(const ModelSpec& spec, const ModelState& state) {
  check_dimensions(spec, state);
  return {spec.inflow_jacobian(state.w()), spec.outlet_jacobian(state.z())};
}

ModelState clamp_for_report(const ModelState& state) {
  Vector v = state.values();
  for (double& x : v) x = std::max(x, 0.0);
  return ModelState::from_flat(std::move(v), state.n());
}

}  // namespace epiguard
