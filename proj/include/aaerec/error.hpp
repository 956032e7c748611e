#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace aaerec {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. Carries the 1-based line number of the offending line.
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A dense allocation would exceed the documented size cutoff.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or gradient.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace aaerec
