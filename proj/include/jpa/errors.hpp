#pragma once

#include <stdexcept>

namespace jpa {

// Argument outside the operation's domain.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested operation is undefined at a multistable operating point.
struct BistableError : DomainError {
  using DomainError::DomainError;
};

// Iteration failed to converge; message carries the residual trace.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace jpa
