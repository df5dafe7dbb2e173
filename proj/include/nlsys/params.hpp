#ifndef NLSYS_PARAMS_HPP
#define NLSYS_PARAMS_HPP

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace nlsys {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inadmissible parameters or arguments (bad n, q, omega, b, grid sizes).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// The pair violates ||u||_{2q}^q ||v||_{2q}^q + b ||uv||_q^q > 0.
class ScalingConditionViolation : public Error {
 public:
  using Error::Error;
};

/// One component of a pair is (numerically) identically zero.
class DegenerateComponent : public Error {
 public:
  using Error::Error;
};

/// Supports of a pair overlap although disjointness was required.
class OverlapError : public Error {
 public:
  using Error::Error;
};

/// An iterative method hit its iteration cap or failed to make progress.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Operation only defined in a particular space dimension.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Operation not defined for the given exponent q.
class ExponentError : public Error {
 public:
  using Error::Error;
};

/// Malformed, truncated or incompatible persisted data.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Model parameters of the coupled system
///   -Δu + u      = |u|^{2q-2}u + b|u|^{q-2}u|v|^q
///   -Δv + ω²v    = |v|^{2q-2}v + b|u|^q|v|^{q-2}v
/// in R^n, restricted to radial functions.
struct Params {
  int n = 1;
  double q = 2.0;
  double omega = 1.0;
  double b = 0.0;

  /// Upper (exclusive) bound on q for this dimension; +inf for n <= 2.
  [[nodiscard]] double q_upper() const {
    if (n <= 2) return std::numeric_limits<double>::infinity();
    return static_cast<double>(n) / static_cast<double>(n - 2);
  }

  /// Throws InvalidArgument when the parameters are not admissible.
  void validate() const {
    if (n < 1) throw InvalidArgument("dimension n must be >= 1, got " + std::to_string(n));
    if (!std::isfinite(q) || !(q > 1.0) || !(q < q_upper()))
      throw InvalidArgument("exponent q=" + std::to_string(q) + " outside the subcritical range for n=" +
                            std::to_string(n));
    if (!std::isfinite(omega) || omega < 1.0)
      throw InvalidArgument("omega must be >= 1, got " + std::to_string(omega));
    if (!std::isfinite(b) || b > 0.0) throw InvalidArgument("coupling b must be <= 0, got " + std::to_string(b));
  }

  [[nodiscard]] Params with_b(double new_b) const {
    Params p = *this;
    p.b = new_b;
    return p;
  }
};

/// Energy prefactor (q-1)/(2q) relating I on the Nehari set to the squared norm.
inline double nehari_prefactor(double q) { return (q - 1.0) / (2.0 * q); }

}  // namespace nlsys

#endif  // NLSYS_PARAMS_HPP
