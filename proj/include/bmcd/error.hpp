#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace bmcd {

/// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad input from the caller: malformed arguments, violated preconditions.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Expression text could not be parsed.
class ParseError : public InputError {
 public:
  enum class Kind { Syntax, UnknownIdentifier, VariableOutOfRange, NonConstantExponent };

  ParseError(Kind kind, std::size_t offset, const std::string& what)
      : InputError(what + " (at byte " + std::to_string(offset) + ")"), kind_(kind), offset_(offset) {}

  Kind kind() const noexcept { return kind_; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  Kind kind_;
  std::size_t offset_;
};

/// Evaluation outside the domain of a function (log of non-positive, ...).
class DomainError : public Error {
 public:
  DomainError(const std::string& node, const std::string& what)
      : Error(what + " in '" + node + "'"), node_(node) {}
  const std::string& node() const noexcept { return node_; }

 private:
  std::string node_;
};

/// The geometric model itself is broken: non-SPD metric, focal point, bad convention.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// A trajectory left the chart domain.
class DomainExitError : public ModelError {
 public:
  DomainExitError(double t, const std::string& what)
      : ModelError(what + " (exit time " + std::to_string(t) + ")"), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Focalization: det J reached zero along a Jacobi field.
class FocalPointError : public ModelError {
 public:
  explicit FocalPointError(double t)
      : ModelError("Jacobi determinant vanished (first crossing at t = " + std::to_string(t) + ")"), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// An iterative solver failed to converge.
class ConvergenceError : public Error {
 public:
  ConvergenceError(double residual, const std::string& what)
      : Error(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// Two independent estimators disagree beyond their tolerance.
class EstimatorError : public Error {
 public:
  using Error::Error;
};

/// The counterexample precondition (a direction with modified Ricci below K - 3 delta) fails.
class PreconditionError : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace bmcd
