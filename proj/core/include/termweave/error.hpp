#pragma once

#include <stdexcept>
#include <string>

namespace termweave {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data is malformed or violates a precondition (bad file, duplicate id, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Stored bytes do not match the checksum recorded in the manifest.
class ChecksumError : public Error {
 public:
  using Error::Error;
};

/// A concurrent writer changed shared state, or a lock is already held.
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// A pipeline stage was requested before the artifacts it depends on exist.
class PrerequisiteError : public Error {
 public:
  using Error::Error;
};

/// Iterative solver stopped at its iteration cap without reaching tolerance.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

}  // namespace termweave
