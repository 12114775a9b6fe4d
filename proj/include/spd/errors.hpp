#pragma once

#include <stdexcept>
#include <string>

namespace spd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad shapes, out-of-range values, inconsistent files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class CoordinateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class DimensionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class MissingDataError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient, diverging optimisation.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace spd
