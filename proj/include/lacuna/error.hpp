#pragma once

#include <stdexcept>
#include <string>

namespace lacuna {

// Raised on contract violations of public operations (bad parameters,
// malformed inputs). Numerical diagnostics are reported, not thrown.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace lacuna
