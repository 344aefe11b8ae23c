#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace geofair {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid input: bad configuration, out-of-range values, broken invariants.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Tensor/layer dimension mismatch.
class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

/// Malformed file content. Carries a 1-based line and column where known.
class ParseError : public ValidationError {
 public:
  ParseError(const std::string& message, std::size_t line, std::size_t column)
      : ValidationError(message + " (line " + std::to_string(line) +
                        ", column " + std::to_string(column) + ")"),
        line_(line),
        column_(column) {}

  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t line_ = 0;
  std::size_t column_ = 0;
};

/// Filesystem failure: missing file, unwritable path, truncated stream.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Non-finite value where a finite one is required.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace geofair
