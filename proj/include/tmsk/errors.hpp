#pragma once

#include <stdexcept>
#include <string>

namespace tmsk {

// Malformed user input: bad dimensions, out-of-domain coordinates, bad files.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The (p, q) pair violates positivity or strict monotonicity of p/q.
class KernelValidityError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

// A request that would exceed a configured size cap (dense oracle, enumeration).
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotPositiveDefiniteError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tmsk
