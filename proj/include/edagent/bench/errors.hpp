#pragma once

#include <stdexcept>
#include <string>

namespace edagent::bench {

class BenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Empty suite, duplicate ids, empty check sets, bad comparators.
class InvalidSuite : public BenchError {
 public:
  using BenchError::BenchError;
};

class IoFailure : public BenchError {
 public:
  using BenchError::BenchError;
};

class MalformedLine : public BenchError {
 public:
  MalformedLine(std::size_t line, const std::string& detail)
      : BenchError("line " + std::to_string(line) + ": " + detail), line_(line) {}
  /// 1-based.
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace edagent::bench
