#pragma once

#include <stdexcept>
#include <string>

namespace chicap {

// Malformed, inconsistent or out-of-domain arguments.
class InvalidInput : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Two evaluation routes of the same quantity disagree.
class InternalConsistencyError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Request outside the supported domain (e.g. tensor powers above two in capacity calls).
class Unsupported : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A posteriori verification failed; carries the measured gap in bits.
class VerificationError : public std::runtime_error {
 public:
  VerificationError(const std::string& what, double gap)
      : std::runtime_error(what), gap_(gap) {}
  double gap() const noexcept { return gap_; }

 private:
  double gap_;
};

}  // namespace chicap
