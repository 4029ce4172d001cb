#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hidegl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file; carries the 1-based line number (0 when not line-specific).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Precondition or parameter-domain violation.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Inconsistent run configuration (unknown method, key not used by the method, empty grid).
class UsageError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

/// A symmetric factorization met a non-positive (or negligible) pivot.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::ptrdiff_t pivot, double value)
      : Error(what + " (pivot " + std::to_string(pivot) + " = " + std::to_string(value) + ")"),
        pivot_(pivot),
        value_(value) {}
  std::ptrdiff_t pivot() const noexcept { return pivot_; }
  double value() const noexcept { return value_; }

 private:
  std::ptrdiff_t pivot_;
  double value_;
};

/// An iterative solver stopped at its iteration cap before reaching tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what + " (relative residual " + std::to_string(residual) + ")"), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

/// A dense diagnostic path was asked to materialize more than its cap allows.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace hidegl
