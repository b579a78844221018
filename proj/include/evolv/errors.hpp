#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace evolv {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Grid construction violated h > 0 or n >= 2.
class InvalidGridError : public Error {
 public:
  using Error::Error;
};

/// Operands live on different grids or have incompatible block dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter is out of its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// A structurally causal operator was required but not provided.
class StructuralError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values or an internal numerical inconsistency.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Dense materialization / oracle size cap exceeded.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

/// A diagonal time-step block of the assembled operator is singular.
/// Carries the offending time index.
class DegenerateStepError : public Error {
 public:
  DegenerateStepError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

/// Scenario file failed schema validation; message names the field.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace evolv
