#pragma once

// Shared generators and closed-form reference controllers for the tests.
// The closed forms are written out from the model equations by hand and do
// not go through the generic barrier machinery.

#include <algorithm>
#include <cmath>
#include <random>

#include "epiguard/models.hpp"
#include "epiguard/safety.hpp"

namespace epiguard::testing {

inline constexpr SirParams kSirFig2{0.33, 0.2, 33e6};
inline constexpr SihrdParams kSihrdFig3{0.53, 0.14, 0.03, 0.14, 0.01, 15e6};

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
  double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
  template <class T>
  const T& pick(const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(engine_)];
  }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

inline double relu(double x) { return std::max(0.0, x); }

/// |a - b| on the scale of U = [0, 1] or of the values themselves, whichever is larger.
inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }

// Infected bound for SIR.
inline double closed_form_ai(const SirParams& p, double alpha, double i_max, double s, double i) {
  const double flux = p.beta0 * s * i / p.population;
  return relu(1.0 - (alpha * (i_max - i) + p.gamma * i) / flux);
}

// Hospitalization bound for SIHRD.
inline double closed_form_ah(const SihrdParams& p, double alpha, double alpha_e, double h_max, double s,
                             double i, double h) {
  const double denom = p.lambda * p.beta0 * s * i / p.population;
  return relu(1.0 - alpha_e * alpha * (h_max - h) / denom -
              ((p.nu - alpha - alpha_e) * (p.lambda * i - p.nu * h) + (p.gamma + p.lambda + p.mu) * p.lambda * i) /
                  denom);
}

// Death bound for SIHRD.
inline double closed_form_ad(const SihrdParams& p, double alpha, double alpha_e, double d_max, double s,
                             double i, double d) {
  const double denom = p.mu * p.beta0 * s * i / p.population;
  return relu(1.0 - alpha_e * alpha * (d_max - d) / denom -
              (p.gamma + p.lambda + p.mu - alpha - alpha_e) * p.mu * i / denom);
}

/// Random SIR state with S, I > 0 and the remainder in R.
inline ModelState random_sir_state(Rng& rng, double n) {
  const double s = rng.uniform(0.01, 1.0) * n;
  const double i = std::min(rng.log_uniform(10.0, 0.2 * n), n - s);
  return ModelState::from_flat({s, i, n - s - i}, 2);
}

/// Random SIHRD state with S, I > 0.
inline ModelState random_sihrd_state(Rng& rng, double n) {
  const double s = rng.uniform(0.05, 0.9) * n;
  const double i = rng.log_uniform(10.0, 0.05 * n);
  const double h = rng.uniform(0.0, 0.01) * n;
  const double d = rng.uniform(0.0, 0.03) * n;
  return ModelState::from_flat({s, i, h, n - s - i - h - d, d}, 2);
}

}  // namespace epiguard::testing
