#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hmpt {

// Malformed or inconsistent input data (trace, plan, machine, measurements).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A trace record that cannot be accepted. Carries the 1-based line number.
class ParseError : public DataError {
 public:
  ParseError(std::size_t line, const std::string& reason)
      : DataError(reason + " at line " + std::to_string(line)), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Bad command-line usage; maps to exit status 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hmpt
