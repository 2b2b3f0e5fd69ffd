#pragma once

#include <stdexcept>
#include <string>

namespace rvqmotion {

// Base for every error raised by the library. The CLI maps the concrete
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Inconsistent shapes, joint counts, malformed scripts.
class StructuralError : public Error {
 public:
  using Error::Error;
};

// Invalid hyperparameters or unknown identifiers.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or degenerate numeric input.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed motion files, checkpoints, reports.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

} // namespace rvqmotion
