#pragma once

#include <stdexcept>
#include <string>

namespace nsbvar {

// Invalid argument or configuration (CLI exit code 2).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A required column or config key is missing (CLI exit code 2).
class SchemaError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Input file contents violate the panel invariants (CLI exit code 2).
class DataError : public ArgumentError {
 public:
  using ArgumentError::ArgumentError;
};

// Factorization, rank or convergence failure (CLI exit code 3).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A model produced no usable result, e.g. zero accepted rotations (CLI exit code 3).
class ResultError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace nsbvar
