#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mcc {

// Bad argument values: out-of-range targets, fractions, iteration counts.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Shape disagreements between label vectors, orders, spaces and inputs.
class StructuralError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Dataset or model file could not be parsed. line() is 1-based, 0 if unknown.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// An exhaustive enumeration would exceed its configured cap.
class IntractableError : public std::runtime_error {
 public:
  IntractableError(const std::string& what, std::size_t cap)
      : std::runtime_error(what + " (cap " + std::to_string(cap) + ")"), cap_(cap) {}

  std::size_t cap() const noexcept { return cap_; }

 private:
  std::size_t cap_;
};

}  // namespace mcc
