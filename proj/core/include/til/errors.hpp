#pragma once

#include <stdexcept>
#include <string>

namespace til {

// Invalid user input: malformed configs, inconsistent dimensions, matrices
// that fail their construction-time checks. CLI exit code 2.
class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Numerical failure at run time: conditioning thresholds, residuals above
// tolerance, stiffness guard violations, non-finite state. CLI exit code 1.
class numeric_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace til
