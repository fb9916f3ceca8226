#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace espmv {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Matrix Market or log input that could not be understood. `line` is
/// 1-based; 0 means the problem is not tied to a single line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Operand shapes that do not fit together (vector length, permutation size).
class DimensionError : public Error {
 public:
  using Error::Error;
};

}  // namespace espmv
