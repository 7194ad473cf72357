#pragma once

#include <stdexcept>
#include <string>

namespace fockbench {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A dimension or index does not fit the integer range (or a requested size is absurd).
class SizingError : public Error {
public:
  using Error::Error;
};

/// Malformed input: wrong shape, broken symmetry, out-of-cutoff occupation, unknown reference.
/// `field()` names the offending document field or argument when one exists.
class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : Error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// Operands live on different spaces or have incompatible block shapes.
class SpaceMismatch : public Error {
public:
  using Error::Error;
};

/// Numerical breakdown (e.g. Cholesky of a matrix that is not positive definite).
class NumericalError : public Error {
public:
  using Error::Error;
};

}  // namespace fockbench
