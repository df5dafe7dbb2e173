#ifndef NLSYS_SOLVER_HPP
#define NLSYS_SOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <future>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "nlsys/functionals.hpp"
#include "nlsys/grid.hpp"
#include "nlsys/params.hpp"
#include "nlsys/scaling.hpp"
#include "nlsys/soliton.hpp"

namespace nlsys {

struct SolveOptions {
  int max_iterations = 50000;
  /// Converged when the relative decrease of Ĵ over `stall_window` iterations drops below this.
  int stall_window = 20;
  double stall_tolerance = 1e-12;
  /// Also converged when the predicted decrease of log Ĵ for a full step
  /// (the directional slope) drops below this. Catches slow drift along
  /// near-zero modes, e.g. a bump sliding towards the boundary.
  double slope_tolerance = 1e-11;
  double initial_step = 1.0;
  double backtrack = 0.5;
  double armijo = 1e-4;
  int max_backtracks = 50;
  /// Number of early descent iterates at which the envelope gradient is checked.
  int envelope_checks = 3;
  std::uint64_t rng_seed = 20130315;
  unsigned workers = 1;
  /// Throw ConvergenceFailure when the iteration cap is hit.
  bool throw_on_cap = true;
  /// solve(): iterations per racing round between seed comparisons (0: no racing).
  int race_chunk = 1000;
  /// Additional seeds tried by solve() next to the default ones.
  std::vector<Pair> extra_seeds;
  bool use_default_seeds = true;
};

struct Solution {
  Params params;
  Pair pair;  // scaled onto the discrete Nehari set
  double kappa = 0.0;
  double j_hat = 0.0;
  NehariScaling scaling;
  NehariResiduals residuals;
  double el_residual = 0.0;
  std::optional<double> hamiltonian_residual;
  int iterations = 0;
  bool converged = true;
  /// Worst relative mismatch of envelope gradient checks (if any were run).
  std::optional<double> envelope_error;
  /// Set by partition_ground: interface radius and which component is inside.
  std::optional<double> interface_radius;
  std::string label;

  [[nodiscard]] const GridPtr& grid() const { return pair.grid(); }
};

// ---------------------------------------------------------------------------
// Residual diagnostics.
// ---------------------------------------------------------------------------

namespace detail {

inline double signed_pow(double x, double p) { return x == 0.0 ? 0.0 : std::copysign(std::pow(std::abs(x), p), x); }

}  // namespace detail

/// Weighted discrete L² norm of both equation residuals
///   -Δu + u - |u|^{2q-2}u - b|u|^{q-2}u|v|^q,   -Δv + ω²v - |v|^{2q-2}v - b|u|^q|v|^{q-2}v.
/// With `support_only`, nodes where a component vanishes are excluded from
/// that component's residual (segregated solutions).
inline double el_residual(const Pair& p, const Params& params, bool support_only = false) {
  const RadialGrid& g = *p.grid();
  const auto& u = p.u().values;
  const auto& v = p.v().values;
  std::vector<double> lu(g.size()), lv(g.size());
  detail::laplacian_raw(g, u, lu);
  detail::laplacian_raw(g, v, lv);
  const double q = params.q, b = params.b, w2 = params.omega * params.omega;
  double s = 0.0;
  for (std::size_t i = 0; i < g.unknowns(); ++i) {
    const double au = std::abs(u[i]), av = std::abs(v[i]);
    double ru = -lu[i] + u[i] - detail::signed_pow(u[i], 2.0 * q - 1.0) -
                b * detail::signed_pow(u[i], q - 1.0) * std::pow(av, q);
    double rv = -lv[i] + w2 * v[i] - detail::signed_pow(v[i], 2.0 * q - 1.0) -
                b * detail::signed_pow(v[i], q - 1.0) * std::pow(au, q);
    if (support_only) {
      if (u[i] == 0.0) ru = 0.0;
      if (v[i] == 0.0) rv = 0.0;
    }
    s += g.w[i] * (ru * ru + rv * rv);
  }
  return std::sqrt(s);
}

inline double el_residual(const Solution& sol) { return el_residual(sol.pair, sol.params); }

/// Sup over nodes of the one-dimensional first integral
///   -u'² - v'² + u² + ω²v² - (1/q)(|u|^{2q} + |v|^{2q} + 2b|u|^q|v|^q)
/// with centered first differences. Only defined for n = 1.
inline double hamiltonian_residual(const Pair& p, const Params& params) {
  const RadialGrid& g = *p.grid();
  if (g.n != 1) throw DimensionError("Hamiltonian identity is only available for n = 1");
  const auto du = centered_derivative(g, p.u().values);
  const auto dv = centered_derivative(g, p.v().values);
  const double q = params.q, b = params.b, w2 = params.omega * params.omega;
  double worst = 0.0;
  for (std::size_t i = 0; i < g.unknowns(); ++i) {
    const double u = std::abs(p.u()[i]), v = std::abs(p.v()[i]);
    const double val = -du[i] * du[i] - dv[i] * dv[i] + u * u + w2 * v * v -
                       (std::pow(u, 2.0 * q) + std::pow(v, 2.0 * q) + 2.0 * b * std::pow(u * v, q)) / q;
    worst = std::max(worst, std::abs(val));
  }
  return worst;
}

inline double hamiltonian_residual(const Solution& sol) { return hamiltonian_residual(sol.pair, sol.params); }

// ---------------------------------------------------------------------------
// Envelope gradient of log Ĵ with the inner maximizer α* frozen.
// ---------------------------------------------------------------------------

struct JHatGradient {
  AlphaMax alpha;
  double numer = 0.0;  // ||u||² + α²||v||_ω²
  double denom = 0.0;  // ||u||_{2q}^{2q} + α^{2q}||v||_{2q}^{2q} + 2bα^q||uv||_q^q
  std::vector<double> gu, gv;   // L²(R^{m+2}) gradient of log Ĵ
  std::vector<double> fu, fv;   // weighted nonlinear terms W(...)
};

inline JHatGradient jhat_gradient(const Pair& p, const Params& params) {
  const RadialGrid& g = *p.grid();
  const double q = params.q, b = params.b, w2 = params.omega * params.omega;
  JHatGradient out;
  out.alpha = alpha_maximize(p, params);
  const double al = out.alpha.alpha_star;
  const double aq = std::pow(al, q);
  const auto& k = p.norms();
  out.numer = k.u_sq + al * al * k.v_sq;
  out.denom = k.u_2q + aq * aq * k.v_2q + 2.0 * b * aq * k.uv_q;
  const auto ku = helmholtz_apply(g, p.u().values, 1.0);
  const auto kv = helmholtz_apply(g, p.v().values, w2);
  const std::size_t size = g.size();
  out.gu.assign(size, 0.0);
  out.gv.assign(size, 0.0);
  out.fu.assign(size, 0.0);
  out.fv.assign(size, 0.0);
  const auto& u = p.u().values;
  const auto& v = p.v().values;
  for (std::size_t i = 0; i < g.unknowns(); ++i) {
    const double au = std::abs(u[i]), av = std::abs(v[i]);
    out.fu[i] = g.w[i] * (detail::signed_pow(u[i], 2.0 * q - 1.0) + b * aq * detail::signed_pow(u[i], q - 1.0) * std::pow(av, q));
    out.fv[i] = g.w[i] * (aq * aq * detail::signed_pow(v[i], 2.0 * q - 1.0) +
                          b * aq * detail::signed_pow(v[i], q - 1.0) * std::pow(au, q));
    out.gu[i] = 2.0 * q * (ku[i] / out.numer - out.fu[i] / out.denom);
    out.gv[i] = 2.0 * q * (al * al * kv[i] / out.numer - out.fv[i] / out.denom);
  }
  return out;
}

struct EnvelopeCheck {
  double analytic = 0.0;
  double finite_difference = 0.0;
  [[nodiscard]] double relative_error() const {
    return std::abs(analytic - finite_difference) / std::max(std::abs(analytic), 1e-300);
  }
};

/// Directional derivative of Ĵ along (phi_u, phi_v): envelope formula with
/// α* frozen versus a finite difference of j_hat (α re-maximized).
inline EnvelopeCheck envelope_check(const Pair& p, const Params& params, const std::vector<double>& phi_u,
                                    const std::vector<double>& phi_v, double eps) {
  const auto grad = jhat_gradient(p, params);
  double dot = 0.0;
  for (std::size_t i = 0; i < grad.gu.size(); ++i) dot += grad.gu[i] * phi_u[i] + grad.gv[i] * phi_v[i];
  EnvelopeCheck out;
  out.analytic = grad.alpha.value * dot;
  auto shifted = [&](double e) {
    Field u = p.u(), v = p.v();
    for (std::size_t i = 0; i < u.size(); ++i) {
      u[i] += e * phi_u[i];
      v[i] += e * phi_v[i];
    }
    return j_hat(Pair(std::move(u), std::move(v), params), params);
  };
  // Fourth-order stencil: near stationary iterates the derivative is small
  // and the O(eps²) term of the plain central difference would dominate.
  out.finite_difference =
      (8.0 * (shifted(eps) - shifted(-eps)) - (shifted(2.0 * eps) - shifted(-2.0 * eps))) / (12.0 * eps);
  return out;
}

/// Smooth random Dirichlet perturbation: a few Gaussian bumps inside [0, R).
inline std::vector<double> random_smooth_field(const RadialGrid& g, std::mt19937_64& rng, int bumps = 3) {
  std::uniform_real_distribution<double> centre(0.0, 0.5 * g.R), width(0.5, 2.0), amp(-1.0, 1.0);
  std::vector<double> f(g.size(), 0.0);
  for (int k = 0; k < bumps; ++k) {
    const double c = centre(rng), s = width(rng), a = amp(rng);
    for (std::size_t i = 0; i < g.unknowns(); ++i) {
      const double x = (g.r[i] - c) / s;
      f[i] += a * std::exp(-x * x);
    }
  }
  f.back() = 0.0;
  return f;
}

// ---------------------------------------------------------------------------
// Generic Sobolev-gradient descent with abs/renormalize retraction.
// ---------------------------------------------------------------------------

namespace detail {

struct DescentState {
  std::vector<double> u, v;  // v empty for single-component problems
};

struct DescentResult {
  DescentState state;
  double objective = 0.0;  // log of the minimized quotient
  int iterations = 0;
  bool converged = false;
  std::optional<double> envelope_error;
};

/// Minimizes `objective` (log-scale, NaN if inadmissible) along directions
/// from `direction` (returns slope < 0) with Armijo backtracking. After every
/// trial step the components are replaced by absolute values and
/// renormalized by `retract`. Stops when the slope or the objective's
/// relative decrease over a window of iterations falls below tolerance.
template <class Objective, class Direction, class Retract, class OnIterate>
DescentResult descend(DescentState start, Objective&& objective, Direction&& direction, Retract&& retract,
                      OnIterate&& on_iterate, const SolveOptions& opt) {
  DescentResult res;
  res.state = std::move(start);
  double phi = objective(res.state);
  if (!std::isfinite(phi)) throw ScalingConditionViolation("descent seed is not admissible");
  std::vector<double> history{phi};
  for (int it = 0; it < opt.max_iterations; ++it) {
    on_iterate(it, res.state);
    DescentState dir;
    const double slope = direction(res.state, dir);
    if (!(slope < -opt.slope_tolerance)) {
      res.converged = true;
      break;
    }
    double tau = opt.initial_step;
    bool accepted = false;
    for (int k = 0; k < opt.max_backtracks; ++k, tau *= opt.backtrack) {
      auto trial = retract(res.state, dir, tau);
      if (!trial) continue;
      const double cand = objective(*trial);
      if (std::isfinite(cand) && cand <= phi + opt.armijo * tau * slope) {
        res.state = std::move(*trial);
        phi = cand;
        accepted = true;
        break;
      }
    }
    res.iterations = it + 1;
    if (!accepted) {
      // No representable decrease left along the preconditioned gradient.
      res.converged = true;
      break;
    }
    history.push_back(phi);
    const std::size_t w = static_cast<std::size_t>(opt.stall_window);
    if (history.size() > w) {
      // φ = log Ĵ, so the relative decrease of Ĵ is expm1 of the log decrease.
      const double rel = -std::expm1(phi - history[history.size() - 1 - w]);
      if (rel < opt.stall_tolerance) {
        res.converged = true;
        break;
      }
    }
  }
  res.objective = phi;
  return res;
}

inline double normalize_2q(const RadialGrid& g, std::vector<double>& f, double q) {
  const double norm = std::pow(power_sum(g, f, 2.0 * q), 0.5 / q);
  if (norm > 0.0 && std::isfinite(norm))
    for (auto& x : f) x /= norm;
  return norm;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Single-component ground state on a block of nodes.
// ---------------------------------------------------------------------------

struct ScalarGround {
  std::vector<double> u;  // normalized so that ||u||_{2q} = 1
  double quotient = 0.0;  // min (∫|∇u|² + c u²) / ||u||_{2q}²
  int iterations = 0;
};

/// Minimizes (∫|∇u|² + c u²)/||u||_{2q}² over nonnegative u supported on the
/// node block [lo, hi] (Dirichlet zero outside).
inline ScalarGround scalar_ground(const GridPtr& grid, double q, double c, std::size_t lo, std::size_t hi,
                                  std::vector<double> seed, const SolveOptions& opt = {}) {
  const RadialGrid& g = *grid;
  if (seed.size() != g.size()) throw InvalidArgument("scalar seed size mismatch");
  const HelmholtzSolver solver(g, c, lo, hi);
  for (std::size_t i = 0; i < g.size(); ++i)
    seed[i] = (i < lo || i > hi) ? 0.0 : std::abs(seed[i]);
  if (detail::normalize_2q(g, seed, q) <= 0.0) throw DegenerateComponent("scalar seed vanishes on its block");

  auto quotient = [&](const std::vector<double>& u) {
    return (dirichlet_form(g, u) + c * power_sum(g, u, 2.0)) / std::pow(power_sum(g, u, 2.0 * q), 1.0 / q);
  };
  auto objective = [&](const detail::DescentState& s) { return std::log(quotient(s.u)); };
  auto direction = [&](const detail::DescentState& s, detail::DescentState& dir) {
    const auto& u = s.u;
    const double numer = dirichlet_form(g, u) + c * power_sum(g, u, 2.0);
    const double p2q = power_sum(g, u, 2.0 * q);
    const auto ku = helmholtz_apply(g, u, c);
    std::vector<double> fu(g.size(), 0.0);
    for (std::size_t i = lo; i <= hi; ++i) fu[i] = g.w[i] * std::pow(u[i], 2.0 * q - 1.0);
    const auto kinv = solver.solve(fu);
    dir.u.assign(g.size(), 0.0);
    double slope = 0.0;
    for (std::size_t i = lo; i <= hi; ++i) {
      dir.u[i] = (numer / p2q) * kinv[i] - u[i];
      const double grad = 2.0 * ku[i] / numer - 2.0 * fu[i] / p2q;
      slope += grad * dir.u[i];
    }
    return slope;
  };
  auto retract = [&](const detail::DescentState& s, const detail::DescentState& dir,
                     double tau) -> std::optional<detail::DescentState> {
    detail::DescentState t;
    t.u.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) t.u[i] = std::abs(s.u[i] + tau * dir.u[i]);
    t.u.back() = 0.0;
    if (!(detail::normalize_2q(g, t.u, q) > 0.0)) return std::nullopt;
    return t;
  };
  auto res = detail::descend(detail::DescentState{std::move(seed), {}}, objective, direction, retract,
                             [](int, const detail::DescentState&) {}, opt);
  if (!res.converged && opt.throw_on_cap)
    throw ConvergenceFailure("scalar ground state hit the iteration cap");
  ScalarGround out;
  out.u = std::move(res.state.u);
  out.quotient = quotient(out.u);
  out.iterations = res.iterations;
  return out;
}

// ---------------------------------------------------------------------------
// Coupled minimization of Ĵ.
// ---------------------------------------------------------------------------

namespace detail {

inline Solution finalize(const Pair& normalized, const Params& params, int iterations, bool converged,
                         std::optional<double> envelope_error, std::string label) {
  Solution sol;
  sol.params = params;
  sol.j_hat = j_hat(normalized, params);
  sol.scaling = nehari_project(normalized, params);
  sol.pair = normalized.scaled(sol.scaling.s, sol.scaling.t);
  sol.kappa = energy(sol.pair, params);
  sol.residuals = nehari_residuals(sol.pair, params);
  sol.el_residual = el_residual(sol.pair, params);
  if (sol.pair.grid()->n == 1) sol.hamiltonian_residual = hamiltonian_residual(sol.pair, params);
  sol.iterations = iterations;
  sol.converged = converged;
  sol.envelope_error = envelope_error;
  sol.label = std::move(label);
  return sol;
}

}  // namespace detail

/// Minimizes Ĵ over nonnegative pairs normalized by ||u||_{2q} = ||v||_{2q} = 1,
/// starting from `seed`. Each iteration takes an H¹-preconditioned envelope
/// gradient step (α* frozen), replaces components by absolute values and
/// renormalizes. The converged pair is projected onto M_b* and returned with
/// κ = energy of the projected pair.
inline Solution solve_ground(const Params& params, const GridPtr& grid, const Pair& seed,
                             const SolveOptions& opt = {}) {
  params.validate();
  if (grid->n != params.n) throw InvalidArgument("grid dimension differs from params.n");
  require_fully_nontrivial(seed);
  if (!scaling_condition(seed, params)) throw ScalingConditionViolation("seed violates the scaling condition");

  const RadialGrid& g = *grid;
  const double q = params.q, w2 = params.omega * params.omega;
  const HelmholtzSolver ku_solver(g, 1.0);
  const HelmholtzSolver kv_solver(g, w2);
  std::vector<double> shift_u(g.size(), 0.0), shift_v(g.size(), 0.0), rhs_u(g.size(), 0.0), rhs_v(g.size(), 0.0);
  std::vector<double> dir_u_rhs(g.size(), 0.0), dir_v_rhs(g.size(), 0.0);

  detail::DescentState start;
  start.u = seed.u().values;
  start.v = seed.v().values;
  for (auto& x : start.u) x = std::abs(x);
  for (auto& x : start.v) x = std::abs(x);
  start.u.back() = start.v.back() = 0.0;
  detail::normalize_2q(g, start.u, q);
  detail::normalize_2q(g, start.v, q);

  auto to_pair = [&](const detail::DescentState& s) {
    return Pair(Field(grid, s.u), Field(grid, s.v), params);
  };
  auto objective = [&](const detail::DescentState& s) {
    const PairNorms k = compute_norms(Field(grid, s.u), Field(grid, s.v), q, params.omega);
    if (!scaling_condition(k, params.b)) return std::numeric_limits<double>::quiet_NaN();
    return std::log(alpha_maximize(k, q, params.b).value);
  };
  auto direction = [&](const detail::DescentState& s, detail::DescentState& dir) {
    const Pair p = to_pair(s);
    const auto grad = jhat_gradient(p, params);
    const double al = grad.alpha.alpha_star, al2 = al * al, aq = std::pow(al, q);
    const double ratio_u = grad.numer / grad.denom, ratio_v = grad.numer / (al2 * grad.denom);
    if (params.b == 0.0) {
      const auto ku = ku_solver.solve(grad.fu);
      const auto kv = kv_solver.solve(grad.fv);
      for (std::size_t i = 0; i < g.unknowns(); ++i) {
        dir_u_rhs[i] = ratio_u * ku[i];
        dir_v_rhs[i] = ratio_v * kv[i];
      }
    } else {
      // The repulsive coupling is linear in the updated component, so it
      // moves into the operator as a nonnegative diagonal shift:
      //   (K + ratio |b| α^q W u^{q-2} v^q) u_new = ratio W u^{2q-1}.
      const double nb = -params.b;
      for (std::size_t i = 0; i < g.unknowns(); ++i) {
        const double u = s.u[i], v = s.v[i];
        shift_u[i] = (u > 0.0) ? std::min(ratio_u * nb * aq * g.w[i] * std::pow(v, q) * std::pow(u, q - 2.0), 1e300) : 0.0;
        shift_v[i] = (v > 0.0) ? std::min(ratio_v * nb * aq * g.w[i] * std::pow(u, q) * std::pow(v, q - 2.0), 1e300) : 0.0;
        rhs_u[i] = ratio_u * g.w[i] * std::pow(u, 2.0 * q - 1.0);
        rhs_v[i] = ratio_v * aq * aq * g.w[i] * std::pow(v, 2.0 * q - 1.0);
      }
      dir_u_rhs = HelmholtzSolver(g, 1.0, shift_u).solve(rhs_u);
      dir_v_rhs = HelmholtzSolver(g, w2, shift_v).solve(rhs_v);
    }
    dir.u.assign(g.size(), 0.0);
    dir.v.assign(g.size(), 0.0);
    double slope = 0.0;
    for (std::size_t i = 0; i < g.unknowns(); ++i) {
      dir.u[i] = dir_u_rhs[i] - s.u[i];
      dir.v[i] = dir_v_rhs[i] - s.v[i];
      slope += grad.gu[i] * dir.u[i] + grad.gv[i] * dir.v[i];
    }
    return slope;
  };
  auto retract = [&](const detail::DescentState& s, const detail::DescentState& dir,
                     double tau) -> std::optional<detail::DescentState> {
    detail::DescentState t;
    t.u.resize(g.size());
    t.v.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      t.u[i] = std::abs(s.u[i] + tau * dir.u[i]);
      t.v[i] = std::abs(s.v[i] + tau * dir.v[i]);
    }
    t.u.back() = t.v.back() = 0.0;
    const double nu = detail::normalize_2q(g, t.u, q);
    const double nv = detail::normalize_2q(g, t.v, q);
    // A component whose L^{2q} mass collapses signals a semitrivial attractor.
    if (!(nu > 1e-8) || !(nv > 1e-8)) return std::nullopt;
    return t;
  };

  std::mt19937_64 rng(opt.rng_seed);
  std::optional<double> worst_envelope;
  auto on_iterate = [&](int it, const detail::DescentState& s) {
    if (it >= opt.envelope_checks) return;
    const Pair p = to_pair(s);
    // Relative perturbations keep u ± εφ positive, where Ĵ is differentiable.
    auto pu = random_smooth_field(g, rng);
    auto pv = random_smooth_field(g, rng);
    for (std::size_t i = 0; i < g.size(); ++i) {
      pu[i] *= s.u[i];
      pv[i] *= s.v[i];
    }
    const auto chk = envelope_check(p, params, pu, pv, 1e-3);
    worst_envelope = std::max(worst_envelope.value_or(0.0), chk.relative_error());
  };

  auto res = detail::descend(std::move(start), objective, direction, retract, on_iterate, opt);
  if (!res.converged && opt.throw_on_cap)
    throw ConvergenceFailure("solve_ground hit the iteration cap after " + std::to_string(res.iterations) +
                             " iterations");
  const Pair normalized = to_pair(res.state);
  if (!normalized.fully_nontrivial())
    throw DegenerateComponent("descent collapsed onto a semitrivial state");
  return detail::finalize(normalized, params, res.iterations, res.converged, worst_envelope, "descent");
}

/// Default seeds: (a) overlapping u0- and v0-shaped profiles, (b) u0 at the
/// origin and a v0-shaped bump centred at R/2, (c) the same with the roles
/// of the components exchanged.
inline std::vector<Pair> default_seeds(const Params& params, const GridPtr& grid) {
  const Soliton1D u0(params.q);
  const double om = params.omega;
  const double amp_v = std::pow(om, 1.0 / (params.q - 1.0));
  const double half = 0.5 * grid->R;
  std::vector<Pair> seeds;
  seeds.emplace_back(sample_dirichlet(grid, [&](double r) { return u0(r); }),
                     sample_dirichlet(grid, [&](double r) { return amp_v * u0(om * r); }), params);
  seeds.emplace_back(sample_dirichlet(grid, [&](double r) { return u0(r); }),
                     sample_dirichlet(grid, [&](double r) { return amp_v * u0(om * (r - half)); }), params);
  seeds.emplace_back(sample_dirichlet(grid, [&](double r) { return u0(r - half); }),
                     sample_dirichlet(grid, [&](double r) { return amp_v * u0(om * r); }), params);
  return seeds;
}

/// Runs solve_ground from every admissible seed (defaults plus extra seeds)
/// and keeps the lowest κ. Seeds violating the scaling condition are skipped.
/// Seeds advance in chunks of `race_chunk` iterations; an unconverged seed is
/// dropped once its κ minus its latest per-iteration decrease times its
/// remaining budget still exceeds the best current κ.
inline Solution solve(const Params& params, const GridPtr& grid, const SolveOptions& opt = {}) {
  params.validate();
  if (grid->n != params.n) throw InvalidArgument("grid dimension differs from params.n");
  std::vector<Pair> seeds;
  if (opt.use_default_seeds) seeds = default_seeds(params, grid);
  seeds.insert(seeds.end(), opt.extra_seeds.begin(), opt.extra_seeds.end());

  struct Racer {
    std::optional<Solution> current;
    double rate = std::numeric_limits<double>::infinity();  // κ decrease per iteration in the last chunk
    int used = 0;
    bool active = true;
    std::string error;
  };
  std::vector<Racer> racers(seeds.size());
  const int chunk = opt.race_chunk > 0 ? opt.race_chunk : opt.max_iterations;

  auto advance = [&](std::size_t k) {
    Racer& rc = racers[k];
    try {
      const Pair start = rc.current ? rc.current->pair : Pair(seeds[k].u(), seeds[k].v(), params);
      if (!rc.current && (!start.fully_nontrivial() || !scaling_condition(start, params))) {
        rc.error = "seed inadmissible";
        rc.active = false;
        return;
      }
      SolveOptions local = opt;
      local.extra_seeds.clear();
      local.max_iterations = std::min(chunk, opt.max_iterations - rc.used);
      local.throw_on_cap = false;
      if (rc.current) local.envelope_checks = 0;
      Solution sol = solve_ground(params, grid, start, local);
      rc.used += sol.iterations;
      sol.iterations = rc.used;
      if (rc.current) {
        sol.envelope_error = rc.current->envelope_error;
        rc.rate = (rc.current->kappa - sol.kappa) / std::max(1, local.max_iterations);
      }
      sol.label = "seed " + std::to_string(k);
      rc.current = std::move(sol);
      if (rc.current->converged) {
        rc.active = false;
      } else if (rc.used >= opt.max_iterations) {
        rc.active = false;
        if (opt.throw_on_cap) {
          rc.error = "iteration cap reached after " + std::to_string(rc.used) + " iterations";
          rc.current.reset();
        }
      }
    } catch (const Error& e) {
      rc.error = e.what();
      rc.current.reset();
      rc.active = false;
    }
  };

  for (;;) {
    std::vector<std::size_t> live;
    for (std::size_t k = 0; k < racers.size(); ++k)
      if (racers[k].active) live.push_back(k);
    if (live.empty()) break;
    if (opt.workers > 1 && live.size() > 1) {
      std::vector<std::future<void>> jobs;
      for (std::size_t k : live) jobs.push_back(std::async(std::launch::async, advance, k));
      for (auto& j : jobs) j.get();
    } else {
      for (std::size_t k : live) advance(k);
    }
    double best = std::numeric_limits<double>::infinity();
    for (const auto& rc : racers)
      if (rc.current) best = std::min(best, rc.current->kappa);
    for (auto& rc : racers) {
      if (!rc.active || !rc.current || !std::isfinite(rc.rate)) continue;
      const double reachable = rc.current->kappa - std::max(rc.rate, 0.0) * (opt.max_iterations - rc.used);
      if (reachable > best) {
        rc.active = false;
        rc.error = "dropped: cannot reach the best seed within the iteration budget";
        rc.current.reset();
      }
    }
  }

  std::optional<Solution> best;
  std::string errors;
  for (std::size_t k = 0; k < racers.size(); ++k) {
    auto& rc = racers[k];
    if (rc.current && (!best || rc.current->kappa < best->kappa)) best = std::move(rc.current);
    if (!rc.error.empty()) errors += " [" + std::to_string(k) + "] " + rc.error;
  }
  if (!best) throw ConvergenceFailure("no seed produced a solution:" + errors);
  return std::move(*best);
}

// ---------------------------------------------------------------------------
// Continuation in b.
// ---------------------------------------------------------------------------

struct SweepRecord {
  double b = 0.0;
  double kappa = 0.0;
  double overlap = 0.0;         // ||u_b v_b||_q^q
  double scaled_overlap = 0.0;  // |b| ||u_b v_b||_q^q
  int iterations = 0;
  std::optional<std::string> error;
};

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::optional<Solution>> solutions;
};

/// Solves for each b (strictly decreasing, <= 0) and warm-starts from the
/// previous minimizer; a failed record is logged and the next b starts from
/// the default seeds again.
inline SweepResult continuation_sweep(const Params& base, const std::vector<double>& b_values, const GridPtr& grid,
                                      const SolveOptions& opt = {}) {
  for (std::size_t k = 0; k < b_values.size(); ++k) {
    if (b_values[k] > 0.0) throw InvalidArgument("sweep values of b must be <= 0");
    if (k > 0 && !(b_values[k] < b_values[k - 1])) throw InvalidArgument("sweep values of b must strictly decrease");
  }
  SweepResult out;
  std::optional<Pair> warm;
  for (double b : b_values) {
    const Params p = base.with_b(b);
    SweepRecord rec;
    rec.b = b;
    try {
      SolveOptions local = opt;
      if (warm) {
        local.extra_seeds.insert(local.extra_seeds.begin(), Pair(warm->u(), warm->v(), p));
        local.use_default_seeds = false;
      }
      Solution sol = [&] {
        try {
          return solve(p, grid, local);
        } catch (const Error&) {
          if (!warm) throw;
          SolveOptions fresh = opt;
          return solve(p, grid, fresh);
        }
      }();
      rec.kappa = sol.kappa;
      rec.overlap = sol.pair.norms().uv_q;
      rec.scaled_overlap = std::abs(b) * rec.overlap;
      rec.iterations = sol.iterations;
      warm = sol.pair;
      out.solutions.emplace_back(std::move(sol));
    } catch (const Error& e) {
      rec.error = e.what();
      warm.reset();
      out.solutions.emplace_back(std::nullopt);
    }
    out.records.push_back(rec);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Segregated limit: two-cell nested partition.
// ---------------------------------------------------------------------------

struct PartitionOptions {
  SolveOptions solve;
  int coarse_samples = 24;
};

namespace detail {

struct CellPair {
  ScalarGround inner, outer;
  double j_bar = std::numeric_limits<double>::infinity();
};

}  // namespace detail

/// Minimizes J̄ over two-cell radial partitions {r < ρ}, {ρ < r < R}, with
/// either component in the inner cell. Each cell carries its scalar ground
/// state with Dirichlet data at ρ; ρ is a grid node found by a coarse scan
/// followed by golden-section refinement in the node index.
inline Solution partition_ground(const Params& params, const GridPtr& grid, const PartitionOptions& opt = {}) {
  params.validate();
  if (params.n < 2) throw DimensionError("partition_ground requires n >= 2 (n = 1 has a closed form)");
  if (grid->n != params.n) throw InvalidArgument("grid dimension differs from params.n");
  const RadialGrid& g = *grid;
  const double q = params.q, w2 = params.omega * params.omega;
  const std::size_t last = g.unknowns() - 1;  // node m
  const std::size_t kmin = 3, kmax = last - 3;

  auto bump = [&](std::size_t lo, std::size_t hi) {
    std::vector<double> f(g.size(), 0.0);
    const double a = g.r[lo], b = g.r[hi];
    for (std::size_t i = lo; i <= hi; ++i) {
      const double x = (g.r[i] - a) / (b - a + g.h);
      f[i] = (lo == 0) ? std::cos(0.5 * std::numbers::pi * x) : std::sin(std::numbers::pi * x);
    }
    return f;
  };
  // inner_is_u: component u (frequency 1) inside, v (frequency ω) outside.
  auto evaluate = [&](std::size_t k, bool inner_is_u) {
    detail::CellPair cp;
    const double c_in = inner_is_u ? 1.0 : w2;
    const double c_out = inner_is_u ? w2 : 1.0;
    cp.inner = scalar_ground(grid, q, c_in, 0, k - 1, bump(0, k - 1), opt.solve);
    cp.outer = scalar_ground(grid, q, c_out, k + 1, last, bump(k + 1, last), opt.solve);
    cp.j_bar = std::pow(std::pow(cp.inner.quotient, q / (q - 1.0)) + std::pow(cp.outer.quotient, q / (q - 1.0)),
                        q - 1.0);
    return cp;
  };

  struct Best {
    std::size_t k = 0;
    bool inner_is_u = true;
    detail::CellPair cells;
  } best;
  int total_iterations = 0;

  for (bool inner_is_u : {true, false}) {
    std::vector<std::optional<double>> cache(g.size());
    std::vector<std::optional<detail::CellPair>> cells(g.size());
    auto f = [&](std::size_t k) {
      if (!cache[k]) {
        cells[k] = evaluate(k, inner_is_u);
        total_iterations += cells[k]->inner.iterations + cells[k]->outer.iterations;
        cache[k] = cells[k]->j_bar;
      }
      return *cache[k];
    };
    // Coarse scan.
    std::size_t kbest = kmin;
    const int samples = std::max(4, opt.coarse_samples);
    for (int s = 0; s <= samples; ++s) {
      const std::size_t k = kmin + static_cast<std::size_t>(std::llround(double(kmax - kmin) * s / samples));
      if (f(k) < f(kbest)) kbest = k;
    }
    const std::size_t step = std::max<std::size_t>(1, (kmax - kmin) / static_cast<std::size_t>(samples));
    std::size_t a = (kbest > kmin + step) ? kbest - step : kmin;
    std::size_t b = std::min(kmax, kbest + step);
    // Golden section on integers.
    constexpr double kInvPhi = 0.6180339887498949;
    while (b - a > 3) {
      const std::size_t x1 = b - static_cast<std::size_t>(std::llround(kInvPhi * double(b - a)));
      const std::size_t x2 = a + static_cast<std::size_t>(std::llround(kInvPhi * double(b - a)));
      if (x1 >= x2) break;
      if (f(x1) <= f(x2)) b = x2;
      else a = x1;
    }
    for (std::size_t k = a; k <= b; ++k)
      if (f(k) < f(kbest)) kbest = k;
    if (kbest <= kmin || kbest >= kmax)
      throw ConvergenceFailure("partition interface collapsed to the origin or the boundary");
    if (cells[kbest] && cells[kbest]->j_bar < best.cells.j_bar) {
      best.k = kbest;
      best.inner_is_u = inner_is_u;
      best.cells = *cells[kbest];
    }
  }

  // Assemble: each component scaled onto its own Nehari constraint.
  std::vector<double> u = best.inner_is_u ? best.cells.inner.u : best.cells.outer.u;
  std::vector<double> v = best.inner_is_u ? best.cells.outer.u : best.cells.inner.u;
  Pair normalized(Field(grid, u), Field(grid, v), params);
  const double s = std::pow(normalized.norms().u_sq / normalized.norms().u_2q, 1.0 / (2.0 * q - 2.0));
  const double t = std::pow(normalized.norms().v_sq / normalized.norms().v_2q, 1.0 / (2.0 * q - 2.0));
  Solution sol;
  sol.params = params;
  sol.scaling = {s, t, 0, false};
  sol.pair = normalized.scaled(s, t);
  sol.j_hat = best.cells.j_bar;
  sol.kappa = energy(sol.pair, params);
  sol.residuals = nehari_residuals(sol.pair, params);
  sol.el_residual = el_residual(sol.pair, params.with_b(0.0), true);
  sol.iterations = total_iterations;
  sol.interface_radius = g.r[best.k];
  sol.label = best.inner_is_u ? "partition: u inside" : "partition: v inside";
  return sol;
}

/// κ-equivalent of the best two-cell partition, ((q-1)/2q) J̄^{1/(q-1)}.
inline double partition_kappa(const Solution& sol) { return kappa_from_j(sol.j_hat, sol.params.q); }

// ---------------------------------------------------------------------------
// Truncation-radius study.
// ---------------------------------------------------------------------------

struct DomainRecord {
  double R = 0.0;
  int m = 0;
  double kappa = 0.0;
  int iterations = 0;
  std::optional<std::string> error;
};

struct DomainStudyOptions {
  double h = 0.01;  // fixed mesh width; m = R/h - 1
  SolveOptions solve;
  /// Iteration budget for the zero-extended warm start. Its energy starts at
  /// the previous κ, so a truncated descent still yields a valid upper value.
  int warm_iterations = 2000;
};

/// Linear interpolation of a field onto another grid (zero beyond the old R).
inline Field resample(const Field& f, const GridPtr& target) {
  const RadialGrid& src = *f.grid;
  Field out(target);
  for (std::size_t i = 0; i < target->unknowns(); ++i) {
    const double r = target->r[i];
    if (r >= src.R) continue;
    const double x = r / src.h;
    const std::size_t j = std::min(static_cast<std::size_t>(x), src.size() - 2);
    const double t = x - static_cast<double>(j);
    const double right = (j + 1 < src.unknowns()) ? f[j + 1] : 0.0;
    out[i] = (1.0 - t) * f[j] + t * right;
  }
  return out;
}

/// κ_b*(R) for increasing truncation radii at a fixed mesh width. Each radius
/// is also seeded with the previous minimizer extended by zero (nested
/// spaces), which makes the sequence nonincreasing.
inline std::vector<DomainRecord> domain_convergence_study(const Params& params, const std::vector<double>& R_values,
                                                          const DomainStudyOptions& opt) {
  params.validate();
  for (std::size_t k = 1; k < R_values.size(); ++k)
    if (!(R_values[k] > R_values[k - 1])) throw InvalidArgument("R values must be increasing");
  std::vector<DomainRecord> out;
  std::optional<Pair> previous;
  for (double R : R_values) {
    DomainRecord rec;
    rec.R = R;
    rec.m = static_cast<int>(std::llround(R / opt.h)) - 1;
    try {
      const GridPtr grid = make_grid(params.n, R, rec.m);
      std::optional<Solution> best;
      std::string failure;
      try {
        best = solve(params, grid, opt.solve);
      } catch (const Error& e) {
        failure = e.what();
      }
      if (previous) {
        SolveOptions warm = opt.solve;
        warm.max_iterations = std::min(warm.max_iterations, opt.warm_iterations);
        warm.throw_on_cap = false;
        try {
          const Pair seed(resample(previous->u(), grid), resample(previous->v(), grid), params);
          Solution sol = solve_ground(params, grid, seed, warm);
          sol.label = "warm start";
          if (!best || sol.kappa < best->kappa) best = std::move(sol);
        } catch (const Error& e) {
          failure += std::string(failure.empty() ? "" : "; ") + e.what();
        }
      }
      if (!best) throw ConvergenceFailure(failure);
      const Solution& sol = *best;
      rec.kappa = sol.kappa;
      rec.iterations = sol.iterations;
      previous = sol.pair;
    } catch (const Error& e) {
      rec.error = e.what();
    }
    out.push_back(rec);
  }
  return out;
}

}  // namespace nlsys

#endif  // NLSYS_SOLVER_HPP
