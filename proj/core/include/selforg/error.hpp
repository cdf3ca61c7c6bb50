#pragma once

#include <stdexcept>
#include <string>

namespace selforg {

// Bad or inconsistent user input (parameter files, overrides, invariants of
// parameter records). Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A numerical engine could not produce a trustworthy result (divergence,
// non-convergence, norm drift). Maps to CLI exit code 3.
class EngineError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace selforg
