#pragma once

#include <stdexcept>
#include <string>

namespace bubbleflow {

/// Raised when an argument lies outside the mathematical domain of an operation
/// (D < 3, non-positive scale, empty window, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// Raised for malformed configuration files, flags and data files.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a numerical procedure cannot produce a trustworthy answer
/// (singular solve, wrong eigenvalue count, failed balance).
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

inline void require_domain(bool ok, const std::string& what) {
  if (!ok) throw DomainError(what);
}

} // namespace bubbleflow
