#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rsamp {

// Root of every error the library throws. The CLI maps subclasses onto exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A precondition on an argument value was violated.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// An operation was invoked in the wrong lifecycle state.
class StateError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss during training; carries where it happened (1-based).
class DivergenceError : public NumericalError {
 public:
  DivergenceError(std::size_t epoch, std::size_t batch, const std::string& what)
      : NumericalError(what), epoch_(epoch), batch_(batch) {}

  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A file parsed but its content does not follow the expected layout.
class FormatError : public IoError {
 public:
  using IoError::IoError;
};

// Two related inputs disagree with each other (e.g. image and label counts).
class ConsistencyError : public IoError {
 public:
  using IoError::IoError;
};

// Bad command line or configuration value.
class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace rsamp
