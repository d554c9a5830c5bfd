#pragma once

#include <stdexcept>
#include <string>

namespace btl {

// Base of every error thrown by the library. Callers that only need a
// message can catch this; the CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A spectrum description violates 0 <= eta <= 1, evenness, or parameter ranges.
class SpecInvalidError : public Error {
 public:
  using Error::Error;
};

// Argument outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Tabulated spectrum evaluated outside its sampled band.
class ExtrapolationError : public Error {
 public:
  using Error::Error;
};

// Mismatched grids or matrix shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Quadrature or eigensolver failure. Carries the error estimate when known.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what, double estimate = 0.0)
      : Error(what), estimate_(estimate) {}
  double estimate() const noexcept { return estimate_; }

 private:
  double estimate_;
};

// Continuous-time capacity diverges (eta == 1 on a set of positive measure).
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Q_k vanishes everywhere on the requested bracket.
class NoChannelOpenError : public Error {
 public:
  using Error::Error;
};

// The tail of the spectrum is not monotone, so the lambda_1 bound does not apply.
class BoundInapplicableError : public Error {
 public:
  using Error::Error;
};

// Malformed run configuration; key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error("config key '" + key + "': " + what), key_(key) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace btl
