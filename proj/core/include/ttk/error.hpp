#pragma once

#include <stdexcept>
#include <string>

namespace ttk {

/// Base of every error thrown by the toolkit. The CLI maps the concrete type
/// onto its exit code (validation 2, capability 3, I/O 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented contract (malformed record, bad size, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A score is mathematically undefined for the given input (zero
/// denominator, degenerate variance). Never silently turned into NaN.
class UndefinedScoreError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// The data or endpoint cannot supply what a method needs.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Network failure after the retry budget was spent.
class TransportError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace ttk
