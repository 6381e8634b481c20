#pragma once

#include <stdexcept>
#include <string>

namespace tempofield {

/// Root of every error raised by the library. Callers that only care about
/// "something went wrong" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed input text. `line` is 1-based, 0 when not tied to a line.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line = 0)
      : Error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class GradientError : public Error {
 public:
  using Error::Error;
};

/// Evaluation protocol could not be carried out (too few non-edges, every
/// test step skipped, ...).
class ProtocolError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Statistic undefined for the given input (constant vector, no positives).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

}  // namespace tempofield
