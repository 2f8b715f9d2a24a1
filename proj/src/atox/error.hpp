#pragma once

#include <stdexcept>
#include <string>

namespace atox {

// Bad inputs: malformed files, schema violations, impossible configuration.
// Maps to process exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Failures while doing otherwise-valid work (I/O, degenerate statistics).
// Maps to process exit code 3.
class RuntimeError : public std::runtime_error {
 public:
  explicit RuntimeError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace atox
