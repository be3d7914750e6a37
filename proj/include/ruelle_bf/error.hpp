#pragma once

#include <stdexcept>
#include <string>

namespace rbf {

enum class ErrorCode {
  invalid_argument,
  parse,
  io,
  model_invalid,
  singular,
  resonance,
  non_convergence,
  out_of_range,
  internal,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Singular block of a graded operator; carries the offending degree.
class SingularBlockError : public Error {
 public:
  SingularBlockError(int degree, const std::string& what)
      : Error(ErrorCode::singular, what), degree_(degree) {}
  int degree() const noexcept { return degree_; }

 private:
  int degree_;
};

class NonConvergenceError : public Error {
 public:
  NonConvergenceError(double norm, const std::string& what)
      : Error(ErrorCode::non_convergence, what), norm_(norm) {}
  double diagnostic_norm() const noexcept { return norm_; }

 private:
  double norm_;
};

// Malformed row of a length-spectrum file.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(ErrorCode::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) throw Error(ErrorCode::invalid_argument, what);
}

}  // namespace rbf
