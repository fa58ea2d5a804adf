#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace meso {

/// Base of every error raised by the library. The CLI maps these to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid or unsupported configuration value; the message names the parameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input data (wrong shape, non-finite value, bad encoding).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition of an operation.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Mismatched dimensions between arguments.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// The requested operation is not available for the given object.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// A numerical solver failed (non-convergence, singular system, blow-up).
class SolverError : public Error {
 public:
  using Error::Error;
};

/// A moment or normal-equation system lacks the rank needed for a unique answer.
class RankError : public SolverError {
 public:
  using SolverError::SolverError;
};

/// Training diverged.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Text-format parse failure carrying the 1-based line number.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace meso
