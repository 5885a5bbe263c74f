#pragma once

#include <stdexcept>
#include <string>

namespace bridgediag {

/// Raised for every recoverable failure in the library. The message is the
/// user-facing diagnosis ("degenerate covariance", "unbalanced chains", ...).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bridgediag
