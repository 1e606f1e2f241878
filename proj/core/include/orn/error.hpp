#pragma once

#include <stdexcept>
#include <string>

namespace orn {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shapes that do not agree for an operation.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Non-finite values or failed numerical checks.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Malformed files, RLE counts or headers.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Synthetic data generation could not satisfy its constraints.
class GenerationError : public Error {
 public:
  using Error::Error;
};

}  // namespace orn
