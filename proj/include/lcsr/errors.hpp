#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace lcsr {

/// Base of every error raised by the toolkit. Carries the offending residual
/// (pivot, determinant, closedness defect, ...) when one exists.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what, std::optional<double> residual = std::nullopt)
      : std::runtime_error(what), residual_(residual) {}

  std::optional<double> residual() const noexcept { return residual_; }

 private:
  std::optional<double> residual_;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

/// A point (or a finite-difference stencil) left the declared chart box.
class DomainError : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

/// Division by a zero jet value, or a singular-to-tolerance linear system.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// The jet does not carry the derivative order an operation needs.
class OrderExhausted : public Error {
 public:
  using Error::Error;
};

/// A form that must be nondegenerate is not (|det Ω| at or below tolerance).
class DegenerateForm : public Error {
 public:
  using Error::Error;
};

/// A sampled precondition failed (closedness, level-set membership, freeness, ...).
class PreconditionFailed : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line = 0) : Error(what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace lcsr
