#pragma once

#include <stdexcept>
#include <string>

namespace camtraj {

// Base for every error raised by the library. The CLI maps subclasses onto
// exit codes: ValidationError-derived -> 1, SolverError -> 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input that violates a documented invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IndexError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class InsufficientHorizonError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Two keyframes landed on the same grid stage.
class CollisionError : public ValidationError {
 public:
  CollisionError(std::size_t first, std::size_t second, int stage)
      : ValidationError("keyframes " + std::to_string(first) + " and " +
                        std::to_string(second) + " both map to grid stage " +
                        std::to_string(stage)),
        first_(first),
        second_(second),
        stage_(stage) {}

  std::size_t first() const { return first_; }
  std::size_t second() const { return second_; }
  int stage() const { return stage_; }

 private:
  std::size_t first_;
  std::size_t second_;
  int stage_;
};

// The problem cannot be satisfied as posed (detected before solving).
class InfeasibleError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Scene validation failure carrying the offending field path.
class FieldError : public ValidationError {
 public:
  FieldError(std::string path, const std::string& what)
      : ValidationError(path + ": " + what), path_(std::move(path)) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class ParseError : public ValidationError {
 public:
  ParseError(int line, int column, const std::string& what)
      : ValidationError("parse error at line " + std::to_string(line) +
                        ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class SingularBearingError : public ValidationError {
 public:
  explicit SingularBearingError(int stage)
      : ValidationError("camera and look-at target coincide at stage " +
                        std::to_string(stage)),
        stage_(stage) {}
  int stage() const { return stage_; }

 private:
  int stage_;
};

// The numerical solve did not produce an optimal point.
class SolverError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace camtraj
