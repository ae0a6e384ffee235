#pragma once

#include <stdexcept>
#include <string>

namespace polaron {

// Base for every error raised by the library. Callers that only care about
// "the computation failed" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside the mathematical domain (negative frequency, s <= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Special function evaluated at one of its poles.
class PoleError : public DomainError {
 public:
  using DomainError::DomainError;
};

// Operation only available for some spatial dimensions (closed forms are D = 3).
class UnsupportedDimension : public DomainError {
 public:
  using DomainError::DomainError;
};

// Quadrature or root finder did not reach the requested tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double achieved)
      : Error(what + " (achieved error estimate " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

// Generator has no unique steady state.
class SingularGenerator : public Error {
 public:
  using Error::Error;
};

// Operation called outside the regime it is defined for (e.g. bias-zero
// high-temperature expansion, double frame mapping).
class RegimeError : public Error {
 public:
  using Error::Error;
};

// Invalid run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Crossover criterion keeps one sign across the whole temperature bracket.
class NoCrossing : public Error {
 public:
  NoCrossing(const std::string& what, bool coherent_everywhere)
      : Error(what), coherent_everywhere_(coherent_everywhere) {}

  bool coherent_everywhere() const noexcept { return coherent_everywhere_; }

 private:
  bool coherent_everywhere_;
};

}  // namespace polaron
