#ifndef NLSYS_SOLITON_HPP
#define NLSYS_SOLITON_HPP

#include <cmath>
#include <numbers>

#include "nlsys/params.hpp"

namespace nlsys {

/// Positive even solution of -u'' + u = u^{2q-1} on the real line,
///   u0(x) = q^{1/(2q-2)} sech^{1/(q-1)}((q-1)x).
struct Soliton1D {
  double q = 2.0;

  explicit Soliton1D(double q_) : q(q_) {
    if (!(q > 1.0)) throw InvalidArgument("soliton requires q > 1");
  }

  [[nodiscard]] double amplitude() const { return std::pow(q, 1.0 / (2.0 * q - 2.0)); }

  [[nodiscard]] double operator()(double x) const {
    const double y = (q - 1.0) * std::abs(x);
    // sech(y)^{1/(q-1)} evaluated via exp to stay finite for large |x|.
    const double sech = 2.0 * std::exp(-y) / (1.0 + std::exp(-2.0 * y));
    return amplitude() * std::pow(sech, 1.0 / (q - 1.0));
  }

  [[nodiscard]] double derivative(double x) const { return -(*this)(x)*std::tanh((q - 1.0) * x); }

  [[nodiscard]] double second_derivative(double x) const {
    // u'' = u - u^{2q-1}
    const double u = (*this)(x);
    return u - std::pow(u, 2.0 * q - 1.0);
  }
};

inline Soliton1D soliton_1d(double q) { return Soliton1D(q); }

/// c0 = I(u0, 0) in one dimension, in closed form:
///   c0 = q^{1/(q-1)}/2 * sqrt(pi) Γ(q/(q-1)) / Γ(q/(q-1) + 1/2).
inline double c0_1d_exact(double q) {
  if (!(q > 1.0)) throw InvalidArgument("c0 requires q > 1");
  const double k = q / (q - 1.0);
  return 0.5 * std::pow(q, 1.0 / (q - 1.0)) * std::sqrt(std::numbers::pi) *
         std::exp(std::lgamma(k) - std::lgamma(k + 0.5));
}

}  // namespace nlsys

#endif  // NLSYS_SOLITON_HPP
