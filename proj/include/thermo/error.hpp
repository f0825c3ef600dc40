#pragma once

#include <stdexcept>
#include <string>

namespace thermo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An input violates an operation's precondition (bad matrix, infeasible
/// target, word too short, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// A value is outside the mathematical domain of an operation, e.g. a
/// nonpositive potential handed to a metric that needs positivity.
class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A configured resource cap (word enumeration, iteration budget for sizes)
/// would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

/// An iterative solver stopped without meeting its tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_lo = 0.0, double best_hi = 0.0)
      : Error(what), lo_(best_lo), hi_(best_hi) {}

  /// Best bracket the solver had when it gave up (meaning is solver specific).
  double bracket_lo() const { return lo_; }
  double bracket_hi() const { return hi_; }

 private:
  double lo_;
  double hi_;
};

}  // namespace thermo
