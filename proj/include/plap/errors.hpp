#pragma once

#include <stdexcept>
#include <string>

namespace plap {

// Base class for every error raised by the library. The CLI maps the
// concrete type onto its exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidConfig : public Error {
 public:
  explicit InvalidConfig(const std::string& reason, std::string field = {})
      : Error(field.empty() ? reason : "at '" + field + "': " + reason),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& reason, std::size_t position)
      : Error(reason + " (at position " + std::to_string(position) + ")"),
        position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class EmptyAdmissibleSet : public Error {
 public:
  using Error::Error;
};

class SingularJacobian : public Error {
 public:
  using Error::Error;
};

// Continuation stalled next to an eigenvalue. Sweeps record it and move on.
class ResonantParameter : public NonConvergence {
 public:
  using NonConvergence::NonConvergence;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace plap
