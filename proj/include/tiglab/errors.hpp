#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tiglab {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input line. `line` is 1-based and counts the header.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration. `path` is a dotted/JSON-pointer-like field path.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class DivergenceError : public Error {
 public:
  using Error::Error;
};

class FreezeViolation : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

/// Raised by the data-discipline audit when a val/test event leaks into training.
class DisciplineViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace tiglab
