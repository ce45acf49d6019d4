#pragma once

#include <stdexcept>
#include <string>

namespace slq {

/// Inconsistent matrix/vector shapes. Distinct from an invariant violation:
/// the data cannot even be interpreted as a problem instance.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed problem file (bad JSON, wrong value types).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Problem data violates a required invariant (symmetry, definiteness).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: divergence, stagnation, singular systems, empty fit
/// windows.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Riccati flow norm exceeded the divergence cap.
class DivergenceError : public NumericalError {
 public:
  DivergenceError(const std::string& what, double blowup_time)
      : NumericalError(what), blowup_time_(blowup_time) {}
  double blowup_time() const { return blowup_time_; }

 private:
  double blowup_time_;
};

/// Broken internal invariant (e.g. a factorization that theory says cannot
/// fail).
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace slq
