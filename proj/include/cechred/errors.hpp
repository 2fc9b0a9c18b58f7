#pragma once

#include <stdexcept>
#include <string>

namespace cechred {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad dimensions, unparsable files, unknown names.
class InputError : public Error {
 public:
  using Error::Error;
};

/// The data is well formed but violates a mathematical precondition of the
/// operation (a cochain that should be a cocycle is not, a commutator that
/// should be scalar is not, ...).
class ModelViolation : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public ModelViolation {
 public:
  using ModelViolation::ModelViolation;
};

/// Requested coefficient ring is not supported by the operation.
class UnsupportedRing : public InputError {
 public:
  using InputError::InputError;
};

}  // namespace cechred
