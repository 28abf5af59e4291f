#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lsgc {

// Invalid configuration or parameters (exit code 1 at the CLI).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Broken simulation invariant: unknown page, live-data loss, segment
// overflow, clock running backwards. These indicate a bug, not bad input.
class SimulationFault : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// The cleaner cannot reclaim any space and the free list is exhausted.
class CleaningLivelock : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed trace or config input, carrying the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace lsgc
