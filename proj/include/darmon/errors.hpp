#pragma once

#include <stdexcept>
#include <string>

namespace darmon {

/// Base class for all library errors. `exit_code()` is the CLI status that
/// the error maps to.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const { return 1; }
};

/// Input violates an operation precondition (bad matrix, field not
/// admissible, curve out of scope, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 2; }
};

/// Argument outside the domain of a mathematical function (log of zero,
/// exp outside its disc of convergence, non-square, ...).
class DomainError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

/// A bounded search ran out of candidates.
class SearchFailure : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 3; }
};

/// Not enough working precision to certify a result.
class PrecisionError : public Error {
 public:
  using Error::Error;
  int exit_code() const override { return 4; }
};

}  // namespace darmon
