#pragma once

#include <stdexcept>
#include <string>

namespace trdsa {

/// A parameter or configuration violates a documented invariant.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A computation was asked to exceed a configured resource bound.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A computed value broke an internal invariant (e.g. a probability above 1).
class ConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace trdsa
