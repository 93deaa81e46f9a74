#pragma once

#include <stdexcept>
#include <string>

namespace nbtv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operands with incompatible dimensions.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of an operation (e.g. a negative
/// intensity handed to a log-likelihood).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Input that is well-formed but makes the requested quantity undefined
/// (zero-norm reference image, zero step).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

/// Problem too large for a test-scale dense routine.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Malformed file content. Carries the 1-based line and the byte offset of
/// the offending token.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line, std::size_t byte)
      : Error(what + " (line " + std::to_string(line) + ", byte " +
              std::to_string(byte) + ")"),
        line_(line),
        byte_(byte) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t byte() const noexcept { return byte_; }

 private:
  std::size_t line_;
  std::size_t byte_;
};

/// Invalid or unknown configuration key/value.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nbtv
