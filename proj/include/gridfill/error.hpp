#pragma once

#include <stdexcept>
#include <string>

namespace gridfill {

/// Base of every exception the library throws.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tensor or grid dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Caller supplied an argument outside the operation's domain. The CLI maps
/// these to exit code 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A value that must be finite was NaN or infinite.
class NonFiniteError : public Error {
 public:
  using Error::Error;
};

/// A metric is undefined for the given cells (e.g. R2 on constant truth).
class DegenerateMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(what + " (line " + std::to_string(line) + ")"), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

}  // namespace gridfill
