#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace epiguard {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad parameters, dimensions, or scenario settings.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Scenario or case file could not be parsed. `line` is 1-based, 0 when unknown.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : ValidationError(line == 0 ? source + ": " + what
                                  : source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// The control authority (|g_i| or |L_g q_j|) is below the singularity tolerance.
class SingularControlError : public Error {
 public:
  using Error::Error;
};

/// The constraint set violates the common-sign condition needed by the max-combination.
class AssumptionViolation : public Error {
 public:
  using Error::Error;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class PredictionError : public Error {
 public:
  PredictionError(const std::string& what, double theta) : Error(what), theta_(theta) {}
  /// Prediction time at which the controller failed.
  double theta() const noexcept { return theta_; }

 private:
  double theta_;
};

}  // namespace epiguard
