#ifndef NLSYS_TEST_SUPPORT_HPP
#define NLSYS_TEST_SUPPORT_HPP

#include <cmath>
#include <random>

#include "nlsys/functionals.hpp"
#include "nlsys/grid.hpp"

namespace nlsys::fixtures {

/// Positive smooth profile: a sum of Gaussian bumps with random centres,
/// widths and amplitudes, zero at the boundary node.
inline Field random_profile(const GridPtr& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> centre(0.0, 0.6 * g->R), width(0.3, 2.0), amp(0.2, 2.0);
  std::uniform_int_distribution<int> count(1, 3);
  Field f(g);
  const int bumps = count(rng);
  for (int k = 0; k < bumps; ++k) {
    const double c = centre(rng), s = width(rng), a = amp(rng);
    for (std::size_t i = 0; i < g->unknowns(); ++i) {
      const double x = (g->r[i] - c) / s;
      f[i] += a * std::exp(-x * x);
    }
  }
  f.values.back() = 0.0;
  return f;
}

inline Pair random_pair(const GridPtr& g, double q, double omega, std::mt19937_64& rng) {
  Field u = random_profile(g, rng);
  Field v = random_profile(g, rng);
  return Pair(std::move(u), std::move(v), q, omega);
}

}  // namespace nlsys::fixtures

#endif  // NLSYS_TEST_SUPPORT_HPP
