#pragma once

#include <stdexcept>
#include <string>

namespace tonegar {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Missing or unreadable input files, malformed rows that cannot be recovered.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An estimator or root finder failed to produce a usable answer.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace tonegar
