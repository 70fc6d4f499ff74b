#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace qtsp {

/// Bad argument to a public operation (sizes, weights, limits).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Coincident points made a turning angle undefined.
class DegenerateGeometry : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A tour that is not a permutation of the customers starting at 0.
class InvalidTour : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Enumeration-based routine refused an input that is too large.
class SizeGuard : public std::length_error {
 public:
  using std::length_error::length_error;
};

/// Inputs that contradict each other (e.g. best-known better than primal).
class InconsistentData : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace qtsp
