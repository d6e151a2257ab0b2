#pragma once

#include <stdexcept>
#include <string>

namespace locsk {

// Bad input: malformed files, violated preconditions, sizes over limits.
// The CLI maps these to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that was set up correctly but did not produce a usable
// number. The CLI maps these to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveType : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TooLarge : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidGrid : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InvalidSchedule : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class Degenerate : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class TruncationError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace locsk
