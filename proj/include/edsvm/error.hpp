#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace edsvm {

// Bad input: shapes, hyperparameters, labels, configuration.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A solver failed to reach its tolerance or hit an inconsistent state.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Compact scientific notation for diagnostics in error messages.
inline std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", x);
  return buf;
}

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

}  // namespace edsvm
