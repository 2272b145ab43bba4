#pragma once

#include <stdexcept>
#include <string>

namespace parahom {

// Invalid lattice, ensemble or problem parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Inputs that do not belong together (lattice mismatch, nonzero-mean rhs, ...).
class CompatibilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Filesystem and binary format problems.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace parahom
