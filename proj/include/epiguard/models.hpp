#pragma once

// Generalized compartmental dynamics with a scalar intervention input u:
//
//   w' = f(w) + g(w) u      (multiplicative compartments, drive transmission)
//   z' = q(w) + r(z)        (outlet compartments, driven by w)
//
// Time is in days, populations in persons and rates in 1/day throughout.

#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace epiguard {

using Vector = std::vector<double>;

/// Dense row-major matrix; only used for the small model Jacobians.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  /// Row r dotted with v.
  double row_dot(std::size_t r, std::span<const double> v) const;
};

/// Flat state x = [w; z] with the (n, m) split recorded. Labels live on ModelSpec.
class ModelState {
 public:
  ModelState() = default;
  ModelState(std::span<const double> w, std::span<const double> z);
  static ModelState from_flat(Vector values, std::size_t n);

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return values_.size() - n_; }
  std::size_t size() const noexcept { return values_.size(); }

  std::span<const double> w() const noexcept { return {values_.data(), n_}; }
  std::span<const double> z() const noexcept { return {values_.data() + n_, values_.size() - n_}; }
  std::span<double> w() noexcept { return {values_.data(), n_}; }
  std::span<double> z() noexcept { return {values_.data() + n_, values_.size() - n_}; }

  const Vector& values() const noexcept { return values_; }
  Vector& values() noexcept { return values_; }
  double operator[](std::size_t k) const { return values_[k]; }

  double total() const noexcept;

  friend bool operator==(const ModelState&, const ModelState&) = default;

 private:
  Vector values_;
  std::size_t n_ = 0;
};

struct SirParams {
  double beta0 = 0.0;
  double gamma = 0.0;
  double population = 0.0;
  friend bool operator==(const SirParams&, const SirParams&) = default;
};

struct SeirParams {
  double beta0 = 0.0;
  double gamma = 0.0;
  double sigma = 0.0;  ///< inverse latency period
  double population = 0.0;
  friend bool operator==(const SeirParams&, const SeirParams&) = default;
};

struct SihrdParams {
  double beta0 = 0.0;
  double gamma = 0.0;
  double lambda = 0.0;  ///< hospitalization rate
  double nu = 0.0;      ///< hospital recovery rate
  double mu = 0.0;      ///< death rate
  double population = 0.0;
  friend bool operator==(const SihrdParams&, const SihrdParams&) = default;
};

using ModelParams = std::variant<SirParams, SeirParams, SihrdParams>;

enum class ModelKind { Sir, Seir, Sihrd };

const char* to_string(ModelKind kind);

struct Derivative {
  Vector w_dot;
  Vector z_dot;
};

/// One compartmental model instance. Immutable after construction; all
/// evaluators are pure.
class ModelSpec {
 public:
  ModelKind kind() const noexcept { return static_cast<ModelKind>(params_.index()); }
  const ModelParams& params() const noexcept { return params_; }
  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  const std::vector<std::string>& labels() const noexcept { return labels_; }

  double beta0() const noexcept;
  double population() const noexcept;
  /// Total rate at which the infected compartment empties (gamma, or gamma+lambda+mu).
  double infected_outflow_rate() const noexcept;

  /// Flat index of a label, or throws ValidationError.
  std::size_t index_of(const std::string& label) const;

  Vector drift(std::span<const double> w) const;          // f
  Vector control_gain(std::span<const double> w) const;   // g
  Vector outlet_inflow(std::span<const double> w) const;  // q
  Vector outlet_drift(std::span<const double> z) const;   // r
  Matrix inflow_jacobian(std::span<const double> w) const;  // dq/dw, m x n
  Matrix outlet_jacobian(std::span<const double> z) const;  // dr/dz, m x m

  friend bool operator==(const ModelSpec& a, const ModelSpec& b) { return a.params_ == b.params_; }

 private:
  friend ModelSpec build_sir(const SirParams&);
  friend ModelSpec build_seir(const SeirParams&);
  friend ModelSpec build_sihrd(const SihrdParams&);
  ModelSpec(ModelParams params, std::size_t n, std::size_t m, std::vector<std::string> labels);

  ModelParams params_;
  std::size_t n_;
  std::size_t m_;
  std::vector<std::string> labels_;
};

ModelSpec build_sir(const SirParams& params);
ModelSpec build_seir(const SeirParams& params);
ModelSpec build_sihrd(const SihrdParams& params);
ModelSpec build_model(const ModelParams& params);

/// Returns (f(w) + g(w) u, q(w) + r(z)).
Derivative eval_dynamics(const ModelSpec& spec, const ModelState& state, double u);

struct Jacobians {
  Matrix inflow;  ///< dq/dw
  Matrix outlet;  ///< dr/dz
};

Jacobians eval_jacobians(const ModelSpec& spec, const ModelState& state);

/// Throws ValidationError unless the state has the spec's (n, m) split.
void check_dimensions(const ModelSpec& spec, const ModelState& state);

/// Dimension check plus nonnegativity, for states used as initial conditions.
void validate_initial_state(const ModelSpec& spec, const ModelState& state);

/// Copy with negative integration drift clamped to zero, for reporting only.
ModelState clamp_for_report(const ModelState& state);

}  // namespace epiguard
