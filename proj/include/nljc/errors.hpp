#pragma once

#include <stdexcept>
#include <string>

namespace nljc {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A scalar argument is outside its domain (negative nbar, t < 0, ...).
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// The deformation function returned a value that cannot enter an f-factorial.
class InvalidNonlinearity : public Error {
 public:
  using Error::Error;
};

/// Physics constraint violated by an otherwise well-formed parameter set.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Scenario document does not follow the schema.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Unknown preset name.
class LookupError : public Error {
 public:
  using Error::Error;
};

/// Accumulated roundoff exceeded the tolerated band (probabilities outside [0,1]).
class NumericalConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// The ODE oracle could not advance: step size underflow or step budget exhausted.
class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, std::size_t level, double time)
      : Error(what + " (level n=" + std::to_string(level) + ", t=" + std::to_string(time) + ")"),
        level_(level),
        time_(time) {}

  std::size_t level() const noexcept { return level_; }
  double time() const noexcept { return time_; }

 private:
  std::size_t level_;
  double time_;
};

}  // namespace nljc
