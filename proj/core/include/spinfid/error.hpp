#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spinfid {

// Every error raised by the library carries a category. The CLI prints it as
// the machine-parsable prefix `ERROR[<category>]:`.
enum class ErrorCategory {
  domain,      // argument outside the mathematical/physical domain
  range,       // input outside the validity window of an empirical correlation
  validation,  // structurally invalid data (config, trace invariants)
  parse,       // malformed file contents
  io,          // filesystem failures
  fit,         // degenerate least-squares problem
  guess,       // automatic initial guess impossible
};

std::string_view to_string(ErrorCategory category) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCategory::domain, what) {}
};

class RangeError : public Error {
 public:
  explicit RangeError(const std::string& what) : Error(ErrorCategory::range, what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(ErrorCategory::validation, what) {}
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(ErrorCategory::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::io, what) {}
};

/// Raised when the Gauss-Newton normal matrix is singular. `diagnostic()`
/// names the parameter directions that could not be resolved.
class DegenerateFitError : public Error {
 public:
  DegenerateFitError(const std::string& what, std::string diagnostic)
      : Error(ErrorCategory::fit, what + " (" + diagnostic + ")"), diagnostic_(std::move(diagnostic)) {}

  const std::string& diagnostic() const noexcept { return diagnostic_; }

 private:
  std::string diagnostic_;
};

class GuessError : public Error {
 public:
  explicit GuessError(const std::string& what) : Error(ErrorCategory::guess, what) {}
};

}  // namespace spinfid
