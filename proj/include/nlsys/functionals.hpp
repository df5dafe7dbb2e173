#ifndef NLSYS_FUNCTIONALS_HPP
#define NLSYS_FUNCTIONALS_HPP

#include <algorithm>
#include <cmath>
#include <string>

#include "nlsys/grid.hpp"
#include "nlsys/params.hpp"

namespace nlsys {

/// The five integrals every functional of the system is built from.
///   u_sq  = ||u||²     = ∫ |∇u|² + u²
///   v_sq  = ||v||_ω²   = ∫ |∇v|² + ω² v²
///   u_2q  = ||u||_{2q}^{2q},  v_2q = ||v||_{2q}^{2q}
///   uv_q  = ||uv||_q^q
struct PairNorms {
  double u_sq = 0.0;
  double v_sq = 0.0;
  double u_2q = 0.0;
  double v_2q = 0.0;
  double uv_q = 0.0;

  /// Norms of (s u, t v) predicted from homogeneity.
  [[nodiscard]] PairNorms scaled(double s, double t, double q) const {
    PairNorms out;
    out.u_sq = s * s * u_sq;
    out.v_sq = t * t * v_sq;
    out.u_2q = std::pow(s, 2.0 * q) * u_2q;
    out.v_2q = std::pow(t, 2.0 * q) * v_2q;
    out.uv_q = std::pow(s * t, q) * uv_q;
    return out;
  }
};

inline PairNorms compute_norms(const Field& u, const Field& v, double q, double omega) {
  if (u.grid != v.grid && (u.grid->n != v.grid->n || u.grid->m != v.grid->m || u.grid->R != v.grid->R))
    throw InvalidArgument("pair components live on different grids");
  const RadialGrid& g = *u.grid;
  const std::size_t last = g.unknowns();
  PairNorms out;
  out.u_sq = dirichlet_form(g, u.values) + power_sum(g, u.values, 2.0);
  out.v_sq = dirichlet_form(g, v.values) + omega * omega * power_sum(g, v.values, 2.0);
  out.u_2q = power_sum(g, u.values, 2.0 * q);
  out.v_2q = power_sum(g, v.values, 2.0 * q);
  double s = 0.0;
  for (std::size_t i = 0; i < last; ++i) s += g.w[i] * std::pow(std::abs(u[i] * v[i]), q);
  out.uv_q = s;
  return out;
}

/// Two-component candidate (u, v) with cached norms for fixed (q, ω).
class Pair {
 public:
  Pair() = default;
  Pair(Field u, Field v, double q, double omega)
      : u_(std::move(u)), v_(std::move(v)), q_(q), omega_(omega), norms_(compute_norms(u_, v_, q_, omega_)) {}
  Pair(Field u, Field v, const Params& p) : Pair(std::move(u), std::move(v), p.q, p.omega) {}

  [[nodiscard]] const Field& u() const { return u_; }
  [[nodiscard]] const Field& v() const { return v_; }
  [[nodiscard]] const GridPtr& grid() const { return u_.grid; }
  [[nodiscard]] const PairNorms& norms() const { return norms_; }
  [[nodiscard]] double q() const { return q_; }
  [[nodiscard]] double omega() const { return omega_; }

  /// Both components carry non-negligible L^{2q} mass. A component is
  /// treated as zero when its L^{2q} norm is below 1e-12 of the other's.
  [[nodiscard]] bool fully_nontrivial() const {
    const double nu = std::pow(norms_.u_2q, 0.5 / q_);
    const double nv = std::pow(norms_.v_2q, 0.5 / q_);
    const double scale = std::max(nu, nv);
    return nu > 0.0 && nv > 0.0 && std::min(nu, nv) > 1e-12 * scale;
  }

  /// (s u, t v) with norms recomputed from the scaled nodal values.
  [[nodiscard]] Pair scaled(double s, double t) const {
    Field su = u_, tv = v_;
    for (auto& x : su.values) x *= s;
    for (auto& x : tv.values) x *= t;
    return Pair(std::move(su), std::move(tv), q_, omega_);
  }

  [[nodiscard]] Pair swapped() const { return Pair(v_, u_, q_, omega_); }

 private:
  Field u_, v_;
  double q_ = 2.0;
  double omega_ = 1.0;
  PairNorms norms_;
};

inline void require_fully_nontrivial(const Pair& p) {
  if (!p.fully_nontrivial()) throw DegenerateComponent("pair has an identically vanishing component");
}

/// Euler functional I(u,v) = ½(||u||²+||v||_ω²) - (1/2q)(||u||_{2q}^{2q}+||v||_{2q}^{2q}+2b||uv||_q^q).
inline double energy(const PairNorms& k, double q, double b) {
  return 0.5 * (k.u_sq + k.v_sq) - (k.u_2q + k.v_2q + 2.0 * b * k.uv_q) / (2.0 * q);
}

inline double energy(const Pair& p, const Params& params) { return energy(p.norms(), params.q, params.b); }

struct NehariResiduals {
  double h1 = 0.0;
  double h2 = 0.0;

  /// Residuals relative to the quadratic terms ||u||² and ||v||_ω².
  [[nodiscard]] double relative(const PairNorms& k) const {
    return std::max(std::abs(h1) / k.u_sq, std::abs(h2) / k.v_sq);
  }
};

inline NehariResiduals nehari_residuals(const PairNorms& k, double b) {
  return {k.u_sq - k.u_2q - b * k.uv_q, k.v_sq - k.v_2q - b * k.uv_q};
}

inline NehariResiduals nehari_residuals(const Pair& p, const Params& params) {
  require_fully_nontrivial(p);
  return nehari_residuals(p.norms(), params.b);
}

/// ||u||_{2q}^q ||v||_{2q}^q + b||uv||_q^q, positive iff the Nehari projection exists.
inline double scaling_margin(const PairNorms& k, double b) { return std::sqrt(k.u_2q * k.v_2q) + b * k.uv_q; }

inline bool scaling_condition(const PairNorms& k, double b) { return scaling_margin(k, b) > 0.0; }

inline bool scaling_condition(const Pair& p, const Params& params) {
  return scaling_condition(p.norms(), params.b);
}

/// β_{u,v}(s,t) = I(su, tv), evaluated from the cached norms.
inline double beta(const PairNorms& k, double s, double t, double q, double b) {
  return 0.5 * s * s * k.u_sq + 0.5 * t * t * k.v_sq - std::pow(s, 2.0 * q) * k.u_2q / (2.0 * q) -
         std::pow(t, 2.0 * q) * k.v_2q / (2.0 * q) - b * std::pow(s * t, q) * k.uv_q / q;
}

inline double beta(const Pair& p, double s, double t, const Params& params) {
  if (!(s > 0.0) || !(t > 0.0)) throw InvalidArgument("beta requires s, t > 0");
  return beta(p.norms(), s, t, params.q, params.b);
}

/// Relative overlap level below which supports count as disjoint.
inline constexpr double kOverlapTolerance = 1e-10;

/// Rayleigh-type quotient (||u||/||u||_{2q})^{2q/(q-1)} of a single component.
inline double component_quotient(double sq_norm, double p_2q, double q) {
  return std::pow(sq_norm, q / (q - 1.0)) / std::pow(p_2q, 1.0 / (q - 1.0));
}

/// Closed form of the segregated functional,
///   J̄ = ((||u||/||u||_{2q})^{2q/(q-1)} + (||v||_ω/||v||_{2q})^{2q/(q-1)})^{q-1}.
inline double j_bar(const PairNorms& k, double q) {
  if (k.uv_q > kOverlapTolerance * std::sqrt(k.u_2q * k.v_2q))
    throw OverlapError("j_bar requires disjoint supports, ||uv||_q^q = " + std::to_string(k.uv_q));
  return std::pow(component_quotient(k.u_sq, k.u_2q, q) + component_quotient(k.v_sq, k.v_2q, q), q - 1.0);
}

inline double j_bar(const Pair& p) {
  require_fully_nontrivial(p);
  return j_bar(p.norms(), p.q());
}

/// κ-equivalent value (q-1)/(2q) * J^{1/(q-1)} of a reduced functional value.
inline double kappa_from_j(double j, double q) { return nehari_prefactor(q) * std::pow(j, 1.0 / (q - 1.0)); }

}  // namespace nlsys

#endif  // NLSYS_FUNCTIONALS_HPP
