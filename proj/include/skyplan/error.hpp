#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace skyplan {

/// Input outside the mathematical domain of an operation (non-positive
/// distance, coincident points, negative SINR, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid configuration or construction parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input file. The message always names the offending line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Failure while scoring a placement or a plan (NODATA sample, position out
/// of extent).
class EvaluationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A hard constraint (separation, area) is violated by caller-supplied input.
class ConstraintError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exhaustive search refused because the candidate set is too large.
class SizeError : public std::length_error {
 public:
  using std::length_error::length_error;
};

}  // namespace skyplan
