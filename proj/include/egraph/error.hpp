#pragma once

#include <stdexcept>
#include <string>

namespace egraph {

// Malformed or inconsistent input data (bad files, size mismatches, broken
// invariants). Maps to exit code 2 in the CLI.
class InvalidInput : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A computation that cannot produce a meaningful result for otherwise valid
// input (singular covariance, degenerate variance). Exit code 3.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad option values or configuration. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace egraph
