#ifndef NLSYS_SCALING_HPP
#define NLSYS_SCALING_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "nlsys/functionals.hpp"

namespace nlsys {

// ---------------------------------------------------------------------------
// One-dimensional maximization in a logarithmic variable.
// ---------------------------------------------------------------------------

struct ScalarMax {
  double x = 0.0;      // location of the maximum (in the search variable)
  double value = 0.0;  // attained value
  bool bounded = true; // false when bracket expansion ran off to ±infinity
  int evaluations = 0;
};

struct ScalarSearchOptions {
  double initial_step = 0.5;
  double rel_width = 1e-12;
  int max_expansions = 60;
  int max_golden_steps = 200;
  double max_abs_x = 700.0;
};

/// Maximizes f over the real line: bracket expansion from x0 followed by
/// golden-section refinement. Assumes a single interior maximum; if none can
/// be bracketed the result is flagged unbounded.
template <class F>
ScalarMax golden_maximize(F&& f, double x0, const ScalarSearchOptions& opt = {}) {
  ScalarMax res;
  auto eval = [&](double x) {
    ++res.evaluations;
    const double y = f(x);
    return std::isnan(y) ? -std::numeric_limits<double>::infinity() : y;
  };

  double step = opt.initial_step;
  double a = x0 - step, c = x0, b = x0 + step;
  double fa = eval(a), fc = eval(c), fb = eval(b);
  int expansions = 0;
  while (!(fc >= fa && fc >= fb)) {
    if (++expansions > opt.max_expansions || std::abs(c) > opt.max_abs_x) {
      res.bounded = false;
      res.x = c;
      res.value = fc;
      if (fa > res.value) res.value = fa, res.x = a;
      if (fb > res.value) res.value = fb, res.x = b;
      return res;
    }
    step *= 2.0;
    if (fb > fc) {
      a = c, fa = fc;
      c = b, fc = fb;
      b = c + step, fb = eval(b);
    } else {
      b = c, fb = fc;
      c = a, fc = fa;
      a = c - step, fa = eval(a);
    }
  }

  constexpr double kInvPhi = 0.6180339887498949;
  double x1 = b - kInvPhi * (b - a);
  double x2 = a + kInvPhi * (b - a);
  double f1 = eval(x1), f2 = eval(x2);
  for (int it = 0; it < opt.max_golden_steps; ++it) {
    if (b - a <= opt.rel_width * std::max(1.0, std::abs(0.5 * (a + b)))) break;
    if (f1 >= f2) {
      b = x2;
      x2 = x1, f2 = f1;
      x1 = b - kInvPhi * (b - a);
      f1 = eval(x1);
    } else {
      a = x1;
      x1 = x2, f1 = f2;
      x2 = a + kInvPhi * (b - a);
      f2 = eval(x2);
    }
  }
  res.x = c, res.value = fc;
  if (f1 > res.value) res.x = x1, res.value = f1;
  if (f2 > res.value) res.x = x2, res.value = f2;
  return res;
}

template <class F>
ScalarMax golden_minimize(F&& f, double x0, const ScalarSearchOptions& opt = {}) {
  ScalarMax r = golden_maximize([&](double x) { return -f(x); }, x0, opt);
  r.value = -r.value;
  return r;
}

// ---------------------------------------------------------------------------
// The α-maximization inside Ĵ.
// ---------------------------------------------------------------------------

struct AlphaMax {
  double alpha_star = 1.0;
  double value = 0.0;
  /// d/d(log α) of log g at alpha_star; equals α g'(α)/g(α).
  double log_slope = 0.0;
};

namespace detail {

/// log g(α) with g(α) = (a + α²c)^q / (p + α^{2q} r + 2bα^q Q) and its first
/// two derivatives in t = log α.
struct AlphaQuotient {
  double a, c, p, r, bq, q;  // bq = b * ||uv||_q^q

  AlphaQuotient(const PairNorms& k, double q_, double b)
      : a(k.u_sq), c(k.v_sq), p(k.u_2q), r(k.v_2q), bq(b * k.uv_q), q(q_) {}

  [[nodiscard]] double numerator(double alpha) const { return a + alpha * alpha * c; }
  [[nodiscard]] double denominator(double alpha) const {
    const double aq = std::pow(alpha, q);
    return p + aq * aq * r + 2.0 * bq * aq;
  }
  [[nodiscard]] double value(double alpha) const {
    return std::pow(numerator(alpha), q) / denominator(alpha);
  }
  [[nodiscard]] double log_value(double t) const {
    const double alpha = std::exp(t);
    const double d = denominator(alpha);
    if (!(d > 0.0)) return -std::numeric_limits<double>::infinity();
    return q * std::log(numerator(alpha)) - std::log(d);
  }
  [[nodiscard]] std::pair<double, double> log_derivatives(double t) const {
    const double alpha = std::exp(t);
    const double a2 = alpha * alpha;
    const double aq = std::pow(alpha, q);
    const double n0 = a + a2 * c, n1 = 2.0 * a2 * c, n2 = 4.0 * a2 * c;
    const double d0 = p + aq * aq * r + 2.0 * bq * aq;
    const double d1 = 2.0 * q * aq * aq * r + 2.0 * q * bq * aq;
    const double d2 = 4.0 * q * q * aq * aq * r + 2.0 * q * q * bq * aq;
    const double first = q * n1 / n0 - d1 / d0;
    const double second = q * (n2 / n0 - (n1 / n0) * (n1 / n0)) - (d2 / d0 - (d1 / d0) * (d1 / d0));
    return {first, second};
  }
};

}  // namespace detail

/// Global maximizer over α > 0 of
///   g(α) = (||u||² + α²||v||_ω²)^q / (||u||_{2q}^{2q} + α^{2q}||v||_{2q}^{2q} + 2bα^q||uv||_q^q).
/// Search runs in log α: bracket expansion, golden section, Newton polish.
inline AlphaMax alpha_maximize(const PairNorms& k, double q, double b) {
  if (!scaling_condition(k, b))
    throw ScalingConditionViolation("scaling condition violated; the alpha quotient is unbounded");
  const detail::AlphaQuotient g(k, q, b);
  // Decoupled optimum α^{2q-2} = (c p)/(a r) is the starting point.
  const double t0 = std::log((g.c * g.p) / (g.a * g.r)) / (2.0 * q - 2.0);
  ScalarSearchOptions opt;
  opt.initial_step = 0.5;
  const ScalarMax coarse = golden_maximize([&](double t) { return g.log_value(t); }, std::isfinite(t0) ? t0 : 0.0, opt);
  if (!coarse.bounded) throw ConvergenceFailure("alpha maximization failed to bracket a maximum");

  double t = coarse.x;
  auto [d1, d2] = g.log_derivatives(t);
  for (int it = 0; it < 5 && std::abs(d1) > 1e-15 && d2 < 0.0; ++it) {
    const double trial = t - d1 / d2;
    const auto [e1, e2] = g.log_derivatives(trial);
    if (!(std::abs(e1) < std::abs(d1))) break;
    t = trial, d1 = e1, d2 = e2;
  }
  AlphaMax out;
  out.alpha_star = std::exp(t);
  out.value = g.value(out.alpha_star);
  out.log_slope = d1;
  return out;
}

inline AlphaMax alpha_maximize(const Pair& p, const Params& params) {
  require_fully_nontrivial(p);
  return alpha_maximize(p.norms(), params.q, params.b);
}

/// Ĵ(u,v) = max_{α>0} g(α); delegates to alpha_maximize.
inline double j_hat(const PairNorms& k, double q, double b) { return alpha_maximize(k, q, b).value; }

inline double j_hat(const Pair& p, const Params& params) { return alpha_maximize(p, params).value; }

// ---------------------------------------------------------------------------
// Nehari projection: the unique critical point of β_{u,v}.
// ---------------------------------------------------------------------------

struct NehariScaling {
  double s = 1.0;
  double t = 1.0;
  int iterations = 0;
  bool used_fallback = false;
};

namespace detail {

struct BetaGradient {
  double a, c, p, r, bq, q;

  BetaGradient(const PairNorms& k, double q_, double b)
      : a(k.u_sq), c(k.v_sq), p(k.u_2q), r(k.v_2q), bq(b * k.uv_q), q(q_) {}

  // Gradient of β in (log s, log t); components are H1(su,tv), H2(su,tv).
  [[nodiscard]] std::array<double, 2> residual(double s, double t) const {
    const double cross = bq * std::pow(s * t, q);
    return {s * s * a - std::pow(s, 2.0 * q) * p - cross, t * t * c - std::pow(t, 2.0 * q) * r - cross};
  }
  [[nodiscard]] double relative(double s, double t) const {
    const auto g = residual(s, t);
    return std::max(std::abs(g[0]) / (s * s * a), std::abs(g[1]) / (t * t * c));
  }
  [[nodiscard]] std::array<double, 4> jacobian(double s, double t) const {
    const double cross = bq * std::pow(s * t, q);
    return {2.0 * s * s * a - 2.0 * q * std::pow(s, 2.0 * q) * p - q * cross, -q * cross, -q * cross,
            2.0 * t * t * c - 2.0 * q * std::pow(t, 2.0 * q) * r - q * cross};
  }
  /// Root in s of H1(s·, t·) = 0 for fixed t (strictly decreasing after division by s^min(2,q)).
  [[nodiscard]] double solve_s(double t) const {
    const double cross = bq * std::pow(t, q);
    auto f = [&](double ls) {
      const double s = std::exp(ls);
      const double pw = std::min(2.0, q);
      return a * std::pow(s, 2.0 - pw) - std::pow(s, 2.0 * q - pw) * p - cross * std::pow(s, q - pw);
    };
    return std::exp(bisect_decreasing(f));
  }
  [[nodiscard]] double solve_t(double s) const {
    const double cross = bq * std::pow(s, q);
    auto f = [&](double lt) {
      const double t = std::exp(lt);
      const double pw = std::min(2.0, q);
      return c * std::pow(t, 2.0 - pw) - std::pow(t, 2.0 * q - pw) * r - cross * std::pow(t, q - pw);
    };
    return std::exp(bisect_decreasing(f));
  }
  template <class F>
  static double bisect_decreasing(F&& f) {
    double lo = -1.0, hi = 1.0;
    while (f(lo) < 0.0 && lo > -700.0) lo *= 2.0;
    while (f(hi) > 0.0 && hi < 700.0) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
      const double mid = 0.5 * (lo + hi);
      (f(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
  }
};

}  // namespace detail

/// Relative Nehari residual accepted for a projected pair.
inline constexpr double kProjectionTolerance = 1e-9;

/// Finds (s,t) with (su, tv) on the discrete Nehari set M_b*: damped Newton
/// on ∇β = 0 in (log s, log t), falling back to alternating one-dimensional
/// solves. `initial` defaults to the decoupled (b = 0) scaling.
inline NehariScaling nehari_project(const PairNorms& k, double q, double b,
                                    std::optional<std::pair<double, double>> initial = std::nullopt) {
  if (!scaling_condition(k, b)) throw ScalingConditionViolation("scaling condition violated; no Nehari projection");
  const detail::BetaGradient g(k, q, b);
  NehariScaling out;
  if (initial) {
    out.s = initial->first;
    out.t = initial->second;
  } else {
    out.s = std::pow(g.a / g.p, 1.0 / (2.0 * q - 2.0));
    out.t = std::pow(g.c / g.r, 1.0 / (2.0 * q - 2.0));
  }
  if (!(out.s > 0.0) || !(out.t > 0.0)) throw InvalidArgument("initial scaling must be positive");

  auto merit = [&](double s, double t) {
    const auto r = g.residual(s, t);
    const double e0 = r[0] / (s * s * g.a), e1 = r[1] / (t * t * g.c);
    return e0 * e0 + e1 * e1;
  };

  constexpr int kNewtonCap = 50;
  double ls = std::log(out.s), lt = std::log(out.t);
  double current = merit(out.s, out.t);
  bool converged = std::sqrt(current) <= 1e-14;
  for (int it = 0; it < kNewtonCap && !converged; ++it) {
    ++out.iterations;
    const double s = std::exp(ls), t = std::exp(lt);
    const auto r = g.residual(s, t);
    const auto j = g.jacobian(s, t);
    const double det = j[0] * j[3] - j[1] * j[2];
    if (!(std::abs(det) > 0.0) || !std::isfinite(det)) break;
    const double ds = -(j[3] * r[0] - j[1] * r[1]) / det;
    const double dt = -(-j[2] * r[0] + j[0] * r[1]) / det;
    double lambda = 1.0;
    bool accepted = false;
    for (int half = 0; half < 40; ++half, lambda *= 0.5) {
      const double cand = merit(std::exp(ls + lambda * ds), std::exp(lt + lambda * dt));
      if (std::isfinite(cand) && cand < current) {
        ls += lambda * ds, lt += lambda * dt;
        current = cand;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    converged = std::sqrt(current) <= 1e-14;
  }
  out.s = std::exp(ls), out.t = std::exp(lt);

  if (g.relative(out.s, out.t) > 1e-12) {
    out.used_fallback = true;
    double s = out.s, t = out.t;
    for (int it = 0; it < 10000 && g.relative(s, t) > 1e-12; ++it) {
      s = g.solve_s(t);
      t = g.solve_t(s);
      ++out.iterations;
    }
    out.s = s, out.t = t;
  }
  const double rel = g.relative(out.s, out.t);
  if (!(rel <= kProjectionTolerance))
    throw ConvergenceFailure("Nehari projection did not converge, relative residual " + std::to_string(rel));
  return out;
}

inline NehariScaling nehari_project(const Pair& p, const Params& params,
                                    std::optional<std::pair<double, double>> initial = std::nullopt) {
  require_fully_nontrivial(p);
  return nehari_project(p.norms(), params.q, params.b, initial);
}

}  // namespace nlsys

#endif  // NLSYS_SCALING_HPP
