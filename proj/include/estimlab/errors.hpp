#pragma once

#include <stdexcept>
#include <string>

namespace estimlab {

/// Invalid setting / learner / estimator combination, detected before any trial runs.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// An exhaustive enumeration would exceed its configured size guard.
struct GuardExceeded : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The sample admits no consistent hypothesis in the class it is supposed to be realizable over.
struct Unrealizable : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace estimlab
