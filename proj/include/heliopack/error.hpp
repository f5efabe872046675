#pragma once

#include <stdexcept>
#include <string>

namespace heliopack {

/// Base class for every error raised by the library. The CLI maps the
/// subclasses onto process exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed arguments or geometry that violates an operation precondition.
class InvalidInput : public Error {
public:
  using Error::Error;
};

/// Inconsistent configuration (missing band, bad option value).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Input data that cannot be used (weather gaps, unreadable files).
class DataError : public Error {
public:
  using Error::Error;
};

/// The exact solver ran out of nodes before proving optimality.
class SolverNotProven : public Error {
public:
  using Error::Error;
};

}  // namespace heliopack
