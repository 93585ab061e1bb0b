#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace pmp {

using Vector = std::vector<double>;

// Raised when an iterate or input leaves the domain of the log terms
// (a_i^T x <= 0, y_i <= 0, nonpositive entropy arguments).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Inconsistent sizes between the pieces of a problem.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Line search or backtracking gave up.
class StallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input files.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Hawkes simulation produced more events than the configured guard.
class ExplosionGuard : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Writes "warning: <msg>" to stderr unless warnings are silenced.
void warn(const std::string& msg);
void set_warnings_enabled(bool enabled);

}  // namespace pmp
