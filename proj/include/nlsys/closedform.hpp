#ifndef NLSYS_CLOSEDFORM_HPP
#define NLSYS_CLOSEDFORM_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlsys/grid.hpp"
#include "nlsys/params.hpp"
#include "nlsys/scaling.hpp"
#include "nlsys/soliton.hpp"
#include "nlsys/solver.hpp"

namespace nlsys {

namespace detail {

/// Coarse scan of f on [lo, hi] followed by golden-section refinement
/// around the best sample. Guards against several local extrema.
template <class F>
ScalarMax scan_then_maximize(F&& f, double lo, double hi, int samples = 400) {
  double best_x = lo, best = -std::numeric_limits<double>::infinity();
  for (int k = 0; k <= samples; ++k) {
    const double x = lo + (hi - lo) * k / samples;
    const double v = f(x);
    if (v > best) {
      best = v;
      best_x = x;
    }
  }
  const double step = (hi - lo) / samples;
  ScalarSearchOptions opt;
  opt.initial_step = step;
  auto res = golden_maximize(f, best_x, opt);
  if (!(res.value >= best)) res = {best_x, best, true, res.evaluations};
  return res;
}

inline void require_frequency(double omega, double q) {
  if (!(omega >= 1.0) || !std::isfinite(omega)) throw InvalidArgument("omega must be >= 1");
  if (!(q > 1.0) || !std::isfinite(q)) throw InvalidArgument("q must be > 1");
}

/// Full-line trapezoid rule for an even integrand, h * (f(0) + 2 Σ f(kh)).
/// Spectrally accurate for smooth, exponentially decaying integrands.
template <class F>
double even_line_integral(F&& f, double h, double L) {
  const int steps = static_cast<int>(std::ceil(L / h));
  double s = 0.5 * f(0.0);
  for (int k = 1; k <= steps; ++k) s += f(k * h);
  return 2.0 * h * s;
}

}  // namespace detail

/// c0 = I(u0, 0), the energy of the scalar ground state.
/// n = 1: quadrature of the closed-form soliton on the grid nodes with the
/// analytic derivative (trapezoid on the whole line, grid spacing h).
/// n >= 2: single-component descent minimizing ||u||/||u||_{2q} on the grid.
inline double c0(const Params& params, const GridPtr& grid) {
  params.validate();
  const double q = params.q;
  if (params.n == 1) {
    const Soliton1D u0(q);
    auto integrand = [&](double x) {
      const double u = u0(x), du = u0.derivative(x);
      return 0.5 * (du * du + u * u) - std::pow(u, 2.0 * q) / (2.0 * q);
    };
    return detail::even_line_integral(integrand, grid->h, grid->R);
  }
  if (grid->n != params.n) throw InvalidArgument("grid dimension differs from params.n");
  const Soliton1D u0(q);
  const auto seed = sample_dirichlet(grid, [&](double r) { return u0(r); });
  const auto res = scalar_ground(grid, q, 1.0, 0, grid->unknowns() - 1, seed.values);
  // On the Nehari scaling of the minimizer, I = ((q-1)/2q) * quotient^{q/(q-1)}.
  return nehari_prefactor(q) * std::pow(res.quotient, q / (q - 1.0));
}

/// Exponent e in I(0, v0) = ω^e c0 for v0 = ω^{1/(q-1)} u0(ω ·) in R^n.
inline double v0_energy_exponent(int n, double q) { return (2.0 * q - n * (q - 1.0)) / (q - 1.0); }

/// I(0, v0) for the ω-scaled ground state, computed directly: closed-form
/// quadrature for n = 1, a single-component solve with mass ω² for n >= 2.
inline double v0_energy(const Params& params, const GridPtr& grid) {
  params.validate();
  const double q = params.q, om = params.omega;
  if (params.n == 1) {
    const Soliton1D u0(q);
    const double amp = std::pow(om, 1.0 / (q - 1.0));
    auto integrand = [&](double x) {
      const double v = amp * u0(om * x), dv = amp * om * u0.derivative(om * x);
      return 0.5 * (dv * dv + om * om * v * v) - std::pow(v, 2.0 * q) / (2.0 * q);
    };
    return detail::even_line_integral(integrand, grid->h / om, grid->R);
  }
  const Soliton1D u0(q);
  const auto seed = sample_dirichlet(grid, [&](double r) { return u0(om * r); });
  const auto res = scalar_ground(grid, q, om * om, 0, grid->unknowns() - 1, seed.values);
  return nehari_prefactor(q) * std::pow(res.quotient, q / (q - 1.0));
}

/// Ground energy of the decoupled system (b = 0): c0 + I(0, v0).
inline double decoupled_kappa(const Params& params, const GridPtr& grid) {
  return c0(params, grid) + v0_energy(params, grid);
}

/// Segregated level in one dimension, (2 + ω^{(q+1)/(q-1)}) c0. It is an
/// infimum that no segregated pair attains.
inline double kappa_infinity_1d(double omega, double q) {
  detail::require_frequency(omega, q);
  return (2.0 + std::pow(omega, (q + 1.0) / (q - 1.0))) * c0_1d_exact(q);
}

struct BoundResult {
  double value = 0.0;
  double argument = 0.0;  // maximizer α (corollary) or minimizer z (nonexistence)
};

/// Sufficient existence bound in one dimension:
///   max_α ((2+ω^{(q+1)/(q-1)})^{1-q}(1+α²ω)^q - 1 - α^{2q}/ω) / (2 α^q ω^{-1/2}).
/// κ_b* is attained for 0 >= b > this value.
inline BoundResult corollary_bound_detail(double omega, double q) {
  detail::require_frequency(omega, q);
  const double k = std::pow(2.0 + std::pow(omega, (q + 1.0) / (q - 1.0)), 1.0 - q);
  auto f = [&](double t) {
    const double a = std::exp(t);
    const double numer = k * std::pow(1.0 + a * a * omega, q) - 1.0 - std::pow(a, 2.0 * q) / omega;
    return numer / (2.0 * std::pow(a, q) / std::sqrt(omega));
  };
  const auto res = detail::scan_then_maximize(f, -8.0, 8.0);
  return {res.value, std::exp(res.x)};
}

inline double corollary_bound(double omega, double q) { return corollary_bound_detail(omega, q).value; }

/// Nonexistence bound in one dimension (1 < q <= 2):
///   min_z [(ω²-(q-1)ω)z^{2q} - qz² - qω³z^{2q-2} - (ω²(q-1)-ω)]
///         / [qz^{q+2} + (q-2)(ω²+ω)z^q + qω³z^{q-2}].
/// No fully nontrivial solution exists for b below this value. Returns -inf
/// when the denominator changes sign on (0, ∞).
inline BoundResult nonexistence_bound_detail(double omega, double q) {
  detail::require_frequency(omega, q);
  if (q > 2.0) throw ExponentError("nonexistence bound requires q <= 2 (the infimum is -inf for q > 2)");
  const double w = omega, w2 = omega * omega, w3 = w2 * omega;
  // Denominator / z^{q-2} = q z^4 + (q-2)(ω²+ω) z² + q ω³, a quadratic in z².
  const double bq = (q - 2.0) * (w2 + w), disc = bq * bq - 4.0 * q * q * w3;
  if (disc >= 0.0 && (-bq + std::sqrt(disc)) > 0.0)
    return {-std::numeric_limits<double>::infinity(), std::sqrt((-bq + std::sqrt(disc)) / (2.0 * q))};
  auto f = [&](double t) {
    const double z = std::exp(t);
    const double numer = (w2 - (q - 1.0) * w) * std::pow(z, 2.0 * q) - q * z * z - q * w3 * std::pow(z, 2.0 * q - 2.0) -
                         (w2 * (q - 1.0) - w);
    const double denom = std::pow(z, q - 2.0) * (q * std::pow(z, 4.0) + bq * z * z + q * w3);
    return -numer / denom;
  };
  const auto res = detail::scan_then_maximize(f, -8.0, 8.0);
  if (!res.bounded) return {-std::numeric_limits<double>::infinity(), std::exp(res.x)};
  return {-res.value, std::exp(res.x)};
}

inline double nonexistence_bound(double omega, double q) { return nonexistence_bound_detail(omega, q).value; }

// ---------------------------------------------------------------------------
// Variational upper bound for the one-dimensional threshold b*.
// ---------------------------------------------------------------------------

/// Even test pair on the real line with analytic derivatives.
struct AnalyticPair {
  std::function<double(double)> u, du, v, dv;
  std::string label;
};

/// Norms of an analytic pair by full-line quadrature.
struct AnalyticNorms {
  double u_sq = 0.0, v_sq = 0.0, u_2q = 0.0, v_2q = 0.0, uv_q = 0.0;
};

inline AnalyticNorms analytic_norms(const AnalyticPair& p, double omega, double q, double h = 2e-3,
                                    double L = 60.0) {
  AnalyticNorms k;
  k.u_sq = detail::even_line_integral([&](double x) { return p.du(x) * p.du(x) + p.u(x) * p.u(x); }, h, L);
  k.v_sq = detail::even_line_integral(
      [&](double x) { return p.dv(x) * p.dv(x) + omega * omega * p.v(x) * p.v(x); }, h, L);
  k.u_2q = detail::even_line_integral([&](double x) { return std::pow(std::abs(p.u(x)), 2.0 * q); }, h, L);
  k.v_2q = detail::even_line_integral([&](double x) { return std::pow(std::abs(p.v(x)), 2.0 * q); }, h, L);
  k.uv_q = detail::even_line_integral([&](double x) { return std::pow(std::abs(p.u(x) * p.v(x)), q); }, h, L);
  return k;
}

/// max over α of the threshold integrand for one pair; +inf when unbounded.
inline double bstar_integrand_max(const AnalyticNorms& k, double omega, double q) {
  if (!(k.uv_q > 0.0)) throw InvalidArgument("test pair must satisfy uv != 0");
  // ||u0||^{-2q} ||u0||_{2q}^{2q} = M^{1-q} with M = ||u0||² = 2q c0/(q-1).
  const double mass = c0_1d_exact(q) / nehari_prefactor(q);
  const double k0 = std::pow(2.0 + std::pow(omega, (q + 1.0) / (q - 1.0)), 1.0 - q) * std::pow(mass, 1.0 - q);
  // Numerator behaves like k0 a^q - p as α -> 0 and like α^{2q}(k0 c^q - r) as α -> ∞.
  if (k0 * std::pow(k.u_sq, q) - k.u_2q > 0.0 || k0 * std::pow(k.v_sq, q) - k.v_2q > 0.0)
    return std::numeric_limits<double>::infinity();
  auto f = [&](double t) {
    const double a = std::exp(t);
    const double numer = k0 * std::pow(k.u_sq + a * a * k.v_sq, q) - k.u_2q - std::pow(a, 2.0 * q) * k.v_2q;
    return numer / (2.0 * std::pow(a, q) * k.uv_q);
  };
  return detail::scan_then_maximize(f, -12.0, 12.0).value;
}

/// Even pairs built from the soliton and Gaussians. Contains the pair
/// (u0, u0(ω·)) up to a common factor (a = 0).
inline std::vector<AnalyticPair> default_bstar_family(double omega, double q) {
  const Soliton1D u0(q);
  std::vector<AnalyticPair> family;
  auto v_fn = [u0, omega](double x) { return u0(omega * x); };
  auto dv_fn = [u0, omega](double x) { return omega * u0.derivative(omega * x); };
  for (double a : {0.0, 0.5, 1.0, 2.0}) {
    family.push_back({[u0, a](double x) { return u0(x - a) + u0(x + a); },
                      [u0, a](double x) { return u0.derivative(x - a) + u0.derivative(x + a); }, v_fn, dv_fn,
                      "soliton pair a=" + std::to_string(a)});
  }
  for (double su : {0.5, 1.0, 2.0}) {
    for (double sv : {0.5, 1.0, 2.0}) {
      auto g = [](double s) { return [s](double x) { return std::exp(-0.5 * x * x / (s * s)); }; };
      auto dg = [](double s) { return [s](double x) { return -x / (s * s) * std::exp(-0.5 * x * x / (s * s)); }; };
      family.push_back({g(su), dg(su), g(sv / omega), dg(sv / omega),
                        "gaussian pair " + std::to_string(su) + "/" + std::to_string(sv)});
    }
  }
  return family;
}

/// Infimum over the family of the inner maximum; an upper bound for b*(ω,q).
inline double bstar_upper(double omega, double q, const std::vector<AnalyticPair>& family) {
  detail::require_frequency(omega, q);
  if (family.empty()) throw InvalidArgument("bstar_upper needs a non-empty test family");
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : family) best = std::min(best, bstar_integrand_max(analytic_norms(p, omega, q), omega, q));
  return best;
}

inline double bstar_upper(double omega, double q) { return bstar_upper(omega, q, default_bstar_family(omega, q)); }

struct ThresholdReport {
  double omega = 1.0;
  double q = 2.0;
  std::optional<double> nonexistence_bound;  // absent for q > 2
  double corollary_bound = 0.0;
  double bstar_upper_testfamily = 0.0;
  std::optional<double> bstar_numeric;
};

inline ThresholdReport threshold_report(double omega, double q) {
  ThresholdReport r;
  r.omega = omega;
  r.q = q;
  if (q <= 2.0) r.nonexistence_bound = nonexistence_bound(omega, q);
  r.corollary_bound = corollary_bound(omega, q);
  r.bstar_upper_testfamily = bstar_upper(omega, q);
  return r;
}

}  // namespace nlsys

#endif  // NLSYS_CLOSEDFORM_HPP
