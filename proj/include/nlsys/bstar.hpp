#ifndef NLSYS_BSTAR_HPP
#define NLSYS_BSTAR_HPP

#include <cmath>
#include <string>
#include <vector>

#include "nlsys/closedform.hpp"
#include "nlsys/solver.hpp"

namespace nlsys {

enum class Attainment { attained, not_attained };

inline const char* to_string(Attainment a) { return a == Attainment::attained ? "attained" : "not attained"; }

struct BstarTrial {
  double b = 0.0;
  double kappa = 0.0;  // κ_b*(R_max)
  Attainment status = Attainment::not_attained;
  /// κ lies within δ/10 of the decision level κ_{-∞}* - δ.
  bool ambiguous = false;
};

struct BstarOptions {
  int depth = 8;
  /// δ = delta_rel * κ_{-∞}*.
  double delta_rel = 1e-3;
  /// Truncation radii as fractions of the grid radius.
  std::vector<double> radius_fractions{0.25, 0.5, 1.0};
  SolveOptions solve = [] {
    // Separated states on small radii creep towards the boundary; a capped
    // descent still yields an energy above κ_b*(R), which is all the
    // classification at R_max needs.
    SolveOptions o;
    o.max_iterations = 5000;
    o.throw_on_cap = false;
    return o;
  }();
};

struct BstarEstimate {
  double estimate = 0.0;
  double lo = 0.0;  // final bracket
  double hi = 0.0;
  double kappa_infinity = 0.0;
  double delta = 0.0;
  BstarTrial lo_trial, hi_trial;  // classifications at the final bracket endpoints
  std::vector<BstarTrial> trials;  // every evaluation in order

  /// Left endpoint not attained and right endpoint attained.
  [[nodiscard]] bool consistent() const {
    return lo_trial.status == Attainment::not_attained && hi_trial.status == Attainment::attained;
  }
  [[nodiscard]] bool ambiguous() const {
    for (const auto& t : trials)
      if (t.ambiguous) return true;
    return !consistent();
  }
};

/// Energy-gap classification of a single coupling b: attained iff
/// κ_b*(R_max) < κ_{-∞}* - δ, with κ_b*(R) from a domain convergence study.
inline BstarTrial classify_attainment(const Params& params, const GridPtr& grid, const BstarOptions& opt) {
  const double kinf = kappa_infinity_1d(params.omega, params.q);
  const double delta = opt.delta_rel * kinf;
  std::vector<double> radii;
  for (double f : opt.radius_fractions) radii.push_back(f * grid->R);
  DomainStudyOptions dopt;
  dopt.h = grid->h;
  dopt.solve = opt.solve;
  const auto study = domain_convergence_study(params, radii, dopt);
  const auto& last = study.back();
  if (last.error) throw ConvergenceFailure("attainment trial at b=" + std::to_string(params.b) + ": " + *last.error);
  BstarTrial t;
  t.b = params.b;
  t.kappa = last.kappa;
  t.status = (last.kappa < kinf - delta) ? Attainment::attained : Attainment::not_attained;
  t.ambiguous = std::abs(last.kappa - (kinf - delta)) < 0.1 * delta;
  return t;
}

/// Bisection for the one-dimensional threshold b*(ω,q) on
/// [nonexistence_bound, corollary_bound]. Both endpoints are classified
/// numerically first; the bisection keeps a not-attained left end and moves
/// the right end only to attained trials. Returns the final midpoint with
/// the classifications of the final bracket endpoints.
inline BstarEstimate estimate_bstar(const Params& params, const GridPtr& grid, const BstarOptions& opt = {}) {
  params.validate();
  if (params.n != 1) throw DimensionError("estimate_bstar requires n = 1");
  if (grid->n != 1) throw InvalidArgument("estimate_bstar needs a one-dimensional grid");
  BstarEstimate out;
  out.kappa_infinity = kappa_infinity_1d(params.omega, params.q);
  out.delta = opt.delta_rel * out.kappa_infinity;
  out.lo = nonexistence_bound(params.omega, params.q);
  out.hi = corollary_bound(params.omega, params.q);
  if (!std::isfinite(out.lo)) throw InvalidArgument("nonexistence bound is -inf for these parameters");

  auto run = [&](double b) {
    auto t = classify_attainment(params.with_b(b), grid, opt);
    out.trials.push_back(t);
    return t;
  };
  out.lo_trial = run(out.lo);
  out.hi_trial = run(out.hi);
  for (int k = 0; k < opt.depth; ++k) {
    const double mid = 0.5 * (out.lo + out.hi);
    const auto t = run(mid);
    if (t.status == Attainment::attained) {
      out.hi = mid;
      out.hi_trial = t;
    } else {
      out.lo = mid;
      out.lo_trial = t;
    }
  }
  out.estimate = 0.5 * (out.lo + out.hi);
  return out;
}

}  // namespace nlsys

#endif  // NLSYS_BSTAR_HPP
