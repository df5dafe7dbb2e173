#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlsys/closedform.hpp"
#include "nlsys/scaling.hpp"
#include "test_support.hpp"

using namespace nlsys;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

double quotient(const PairNorms& k, double q, double b, double alpha) {
  return std::pow(k.u_sq + alpha * alpha * k.v_sq, q) /
         (k.u_2q + std::pow(alpha, 2.0 * q) * k.v_2q + 2.0 * b * std::pow(alpha, q) * k.uv_q);
}

}  // namespace

TEST(GoldenSearch, FindsInteriorMaximum) {
  const auto r = golden_maximize([](double x) { return -(x - 1.3) * (x - 1.3) + 2.0; }, -4.0);
  EXPECT_TRUE(r.bounded);
  EXPECT_NEAR(r.x, 1.3, 1e-6);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
  const auto m = golden_minimize([](double x) { return std::cosh(x - 0.25); }, 3.0);
  EXPECT_NEAR(m.x, 0.25, 1e-6);
}

TEST(GoldenSearch, ReportsUnboundedRay) {
  const auto r = golden_maximize([](double x) { return x; }, 0.0);
  EXPECT_FALSE(r.bounded);
}

TEST(AlphaMax, DecoupledClosedForm) {
  std::mt19937_64 rng(41);
  const auto g = make_grid(1, 12.0, 400);
  for (double q : {1.4, 2.0, 2.8}) {
    const Pair p = fixtures::random_pair(g, q, 1.5, rng);
    const auto& k = p.norms();
    const auto am = alpha_maximize(k, q, 0.0);
    // Stationarity gives α*^{2q-2} = ||v||² ||u||_{2q}^{2q} / (||u||² ||v||_{2q}^{2q}).
    const double alpha = std::pow(k.v_sq * k.u_2q / (k.u_sq * k.v_2q), 1.0 / (2.0 * q - 2.0));
    EXPECT_NEAR(am.alpha_star / alpha, 1.0, 1e-8);
    EXPECT_NEAR(am.value / quotient(k, q, 0.0, alpha), 1.0, 1e-12);
  }
}

TEST(AlphaMax, SymmetricPairPeaksAtOne) {
  const auto g = make_grid(1, 30.0, 3000);
  const Field f = sample_dirichlet(g, [](double r) { return std::sqrt(2.0) * sech(r); });
  const Pair p(f, f, 2.0, 1.0);
  const auto am = alpha_maximize(p, Params{1, 2.0, 1.0, -0.25});
  EXPECT_NEAR(am.alpha_star, 1.0, 1e-8);
  EXPECT_NEAR(am.value, quotient(p.norms(), 2.0, -0.25, 1.0), 1e-12 * am.value);
}

TEST(AlphaMax, FirstOrderOptimality) {
  std::mt19937_64 rng(43);
  const auto g = make_grid(2, 10.0, 300);
  for (double b : {-0.1, -0.6}) {
    for (int k = 0; k < 10; ++k) {
      const double q = 1.3 + 0.15 * k;
      const Pair p = fixtures::random_pair(g, q, 1.2, rng);
      if (!scaling_condition(p.norms(), b)) continue;
      const auto am = alpha_maximize(p.norms(), q, b);
      const double a = am.alpha_star, e = 1e-5;
      const double d = (std::log(quotient(p.norms(), q, b, a * std::exp(e))) -
                        std::log(quotient(p.norms(), q, b, a * std::exp(-e)))) /
                       (2.0 * e);
      EXPECT_LT(std::abs(d), 1e-6);
      for (double f : {0.5, 0.9, 1.1, 2.0}) EXPECT_LE(quotient(p.norms(), q, b, f * a), am.value * (1.0 + 1e-14));
    }
  }
}

TEST(AlphaMax, CorollaryMaximizerForQuadraticCase) {
  // For q = 2 the bound's numerator and denominator give
  // α⁴ = (1 + ω³)ω / 2 at the maximum.
  for (double omega : {1.0, 1.5, 2.0, 3.0}) {
    const auto d = corollary_bound_detail(omega, 2.0);
    EXPECT_NEAR(d.argument, std::pow((1.0 + omega * omega * omega) * omega / 2.0, 0.25), 1e-6) << omega;
  }
}

TEST(NehariProject, FixedPointOnNehariSet) {
  std::mt19937_64 rng(47);
  const auto g = make_grid(1, 12.0, 400);
  const Params params{1, 2.0, 1.3, -0.4};
  for (int k = 0; k < 8; ++k) {
    const Pair raw = fixtures::random_pair(g, params.q, params.omega, rng);
    if (!scaling_condition(raw, params)) continue;
    const auto sc = nehari_project(raw, params);
    const Pair on = raw.scaled(sc.s, sc.t);
    EXPECT_LE(nehari_residuals(on, params).relative(on.norms()), 1e-9);
    const auto again = nehari_project(on, params);
    EXPECT_NEAR(again.s, 1.0, 1e-9);
    EXPECT_NEAR(again.t, 1.0, 1e-9);
    const auto stretched = nehari_project(on.scaled(2.0, 3.0), params);
    EXPECT_NEAR(stretched.s, 0.5, 1e-9);
    EXPECT_NEAR(stretched.t, 1.0 / 3.0, 1e-9);
  }
}

TEST(NehariProject, DecoupledClosedForm) {
  std::mt19937_64 rng(53);
  const auto g = make_grid(3, 8.0, 300);
  const double q = 1.7;
  const Pair p = fixtures::random_pair(g, q, 2.0, rng);
  const auto& k = p.norms();
  const auto sc = nehari_project(p, Params{3, q, 2.0, 0.0});
  EXPECT_NEAR(sc.s, std::pow(k.u_sq / k.u_2q, 1.0 / (2.0 * q - 2.0)), 1e-9);
  EXPECT_NEAR(sc.t, std::pow(k.v_sq / k.v_2q, 1.0 / (2.0 * q - 2.0)), 1e-9);
}

TEST(NehariProject, EnergyAtProjectionMatchesKappaForm) {
  // The maximum of the energy over the (s,t) quadrant equals the κ-form of Ĵ.
  std::mt19937_64 rng(59);
  const auto g = make_grid(2, 10.0, 300);
  for (double b : {0.0, -0.3, -0.9}) {
    for (int k = 0; k < 6; ++k) {
      const Params params{2, 1.5 + 0.1 * k, 1.1, b};
      const Pair raw = fixtures::random_pair(g, params.q, params.omega, rng);
      if (!scaling_condition(raw, params)) continue;
      const auto sc = nehari_project(raw, params);
      const double e = energy(raw.scaled(sc.s, sc.t), params);
      const double kf = kappa_from_j(j_hat(raw, params), params.q);
      EXPECT_NEAR(e / kf, 1.0, 1e-8);
    }
  }
}

TEST(NehariProject, UniqueAcrossInitialPoints) {
  std::mt19937_64 rng(61);
  const auto g = make_grid(1, 12.0, 300);
  const Params params{1, 1.8, 1.0, -0.5};
  Pair p = fixtures::random_pair(g, params.q, params.omega, rng);
  while (!scaling_condition(p, params)) p = fixtures::random_pair(g, params.q, params.omega, rng);
  const auto ref = nehari_project(p, params);
  std::uniform_real_distribution<double> logscale(-3.0, 3.0);
  for (int k = 0; k < 8; ++k) {
    const auto sc = nehari_project(p, params, std::make_pair(std::exp(logscale(rng)), std::exp(logscale(rng))));
    EXPECT_NEAR(sc.s / ref.s, 1.0, 1e-9);
    EXPECT_NEAR(sc.t / ref.t, 1.0, 1e-9);
  }
}

TEST(NehariProject, ViolationRejected) {
  const auto g = make_grid(1, 20.0, 400);
  const Field f = sample_dirichlet(g, [](double r) { return sech(r); });
  const Pair p(f, f, 2.0, 1.0);
  EXPECT_THROW(nehari_project(p, Params{1, 2.0, 1.0, -1.0}), ScalingConditionViolation);
}
