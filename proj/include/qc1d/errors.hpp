#ifndef QC1D_ERRORS_HPP
#define QC1D_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace qc1d {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Potential evaluated at a non-positive (or out-of-table) separation.
struct DomainError : Error {
  using Error::Error;
};

// Derivative order outside the supported range 0..4.
struct UnsupportedOrderError : Error {
  using Error::Error;
};

// phi'' has no +/- sign change, so no inflection radius exists.
struct NoInflectionError : Error {
  using Error::Error;
};

// A deformation with non-positive bond strain was passed to an energy.
struct InadmissibleDeformationError : Error {
  using Error::Error;
};

// Shape mismatch, missing grid, bad configuration value, ...
struct ArgumentError : Error {
  using Error::Error;
};

// The concavity hypothesis phi''(kF) <= 0 failed for some k in 2..s.
struct AssumptionViolatedError : Error {
  int neighbor_k;
  AssumptionViolatedError(const std::string& msg, int k)
      : Error(msg), neighbor_k(k) {}
};

// Root bracketing failed (no sign change over the given interval).
struct BracketError : Error {
  using Error::Error;
};

// Linearized operator is not positive definite on the zero-mean subspace.
struct NotPositiveDefiniteError : Error {
  using Error::Error;
};

// eta_F is undefined (range is not third-neighbor, or phi''(3F) = 0).
struct UndefinedEtaError : Error {
  using Error::Error;
};

}  // namespace qc1d

#endif
