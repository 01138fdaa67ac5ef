#pragma once

#include <stdexcept>
#include <string>

namespace ufh {

// Errors named after the contract they enforce. All derive from std::runtime_error
// so callers can catch broadly or precisely.

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

struct PopulationTooSmall : std::runtime_error {
  explicit PopulationTooSmall(const std::string& what) : std::runtime_error(what) {}
};

// Thrown by equivalent_rewrite when a candidate has no room for a
// semantics-preserving insertion.
struct NoCapacity : std::runtime_error {
  explicit NoCapacity(const std::string& what) : std::runtime_error(what) {}
};

// Reserved for search spaces whose execution can fail fatally. Neither built-in
// space throws it: the program space cannot misuse memory by construction and
// the graph space has no faults.
struct EvaluationFault : std::runtime_error {
  explicit EvaluationFault(const std::string& what) : std::runtime_error(what) {}
};

struct EmptyTimeCourse : std::runtime_error {
  explicit EmptyTimeCourse(const std::string& what) : std::runtime_error(what) {}
};

struct InsufficientRuns : std::runtime_error {
  explicit InsufficientRuns(const std::string& what) : std::runtime_error(what) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ufh
