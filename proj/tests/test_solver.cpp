#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlsys/bstar.hpp"
#include "nlsys/closedform.hpp"
#include "nlsys/solver.hpp"
#include "test_support.hpp"

using namespace nlsys;

namespace {

double sech(double x) { return 1.0 / std::cosh(x); }

Pair soliton_pair(const GridPtr& g, double omega) {
  return Pair(sample_dirichlet(g, [](double r) { return std::sqrt(2.0) * sech(r); }),
              sample_dirichlet(g, [omega](double r) { return omega * std::sqrt(2.0) * sech(omega * r); }), 2.0,
              omega);
}

/// Positive profiles concentrated near the origin with random shape.
Pair centred_random_pair(const GridPtr& g, const Params& params, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> width(0.5, 3.0), amp(0.3, 3.0), tail(0.0, 0.5);
  auto profile = [&] {
    const double s = width(rng), a = amp(rng), t = tail(rng), s2 = 2.0 * width(rng);
    return sample_dirichlet(g, [=](double r) { return a * std::exp(-r * r / (s * s)) + t * std::exp(-r / s2); });
  };
  Field u = profile();
  Field v = profile();
  return Pair(std::move(u), std::move(v), params);
}

void expect_solution_invariants(const Solution& sol) {
  for (double x : sol.pair.u().values) EXPECT_GE(x, 0.0);
  for (double x : sol.pair.v().values) EXPECT_GE(x, 0.0);
  EXPECT_LE(nehari_residuals(sol.pair, sol.params).relative(sol.pair.norms()), 1e-8);
  EXPECT_LE(sol.el_residual, 5e-3);
  EXPECT_NEAR(energy(sol.pair, sol.params) / sol.kappa, 1.0, 1e-8);
  EXPECT_NEAR(kappa_from_j(sol.j_hat, sol.params.q) / sol.kappa, 1.0, 1e-8);
  EXPECT_TRUE(sol.converged);
}

}  // namespace

TEST(ElResidual, ExactSolitonsSecondOrder) {
  auto res = [](int m) {
    const auto g = make_grid(1, 30.0, m);
    return el_residual(soliton_pair(g, 1.5), Params{1, 2.0, 1.5, 0.0});
  };
  const double e1 = res(1500), e2 = res(3001);
  EXPECT_LT(e2, 1e-3);
  EXPECT_GE(e1 / e2, 3.5);
}

TEST(ElResidual, RandomPairIsFarFromSolution) {
  std::mt19937_64 rng(71);
  const auto g = make_grid(1, 20.0, 1000);
  for (int k = 0; k < 5; ++k) EXPECT_GT(el_residual(fixtures::random_pair(g, 2.0, 1.0, rng), Params{}), 0.1);
}

TEST(HamiltonianResidual, ExactSolitonsSecondOrder) {
  auto res = [](int m) {
    const auto g = make_grid(1, 30.0, m);
    return hamiltonian_residual(soliton_pair(g, 1.2), Params{1, 2.0, 1.2, 0.0});
  };
  const double e1 = res(1500), e2 = res(3001);
  EXPECT_LT(e2, 1e-3);
  EXPECT_GE(e1 / e2, 3.5);
}

TEST(HamiltonianResidual, RejectsHigherDimensions) {
  const auto g = make_grid(2, 10.0, 100);
  std::mt19937_64 rng(73);
  EXPECT_THROW(hamiltonian_residual(fixtures::random_pair(g, 2.0, 1.0, rng), Params{2, 2.0, 1.0, 0.0}),
               DimensionError);
}

TEST(Envelope, RandomPairsAndDirections) {
  std::mt19937_64 rng(79);
  const auto g = make_grid(1, 15.0, 600);
  for (double b : {0.0, -0.3, -0.8}) {
    const Params params{1, 1.8, 1.4, b};
    for (int k = 0; k < 5; ++k) {
      const Pair p = fixtures::random_pair(g, params.q, params.omega, rng);
      if (!scaling_condition(p, params)) continue;
      auto phi_u = random_smooth_field(*g, rng);
      auto phi_v = random_smooth_field(*g, rng);
      for (std::size_t i = 0; i < g->size(); ++i) {
        phi_u[i] *= p.u()[i];
        phi_v[i] *= p.v()[i];
      }
      EXPECT_LE(envelope_check(p, params, phi_u, phi_v, 1e-3).relative_error(), 1e-5);
    }
  }
}

TEST(Envelope, CheckedAlongDescentIterates) {
  const auto g = make_grid(1, 20.0, 800);
  const Params params{1, 2.0, 1.0, -0.2};
  const Pair poor(sample_dirichlet(g, [](double r) { return std::exp(-r / 4.0); }),
                  sample_dirichlet(g, [](double r) { return 1.0 / (1.0 + r * r); }), params);
  SolveOptions opt;
  opt.envelope_checks = 5;
  const auto sol = solve_ground(params, g, poor, opt);
  ASSERT_TRUE(sol.envelope_error.has_value());
  EXPECT_LE(*sol.envelope_error, 1e-5);
}

TEST(Solve, DecoupledLineRecoversSolitons) {
  const auto g = make_grid(1, 30.0, 3000);
  const auto sol = solve(Params{}, g);
  EXPECT_NEAR(sol.kappa, 8.0 / 3.0, 1e-4);
  double err = 0.0;
  for (std::size_t i = 0; i < g->unknowns(); ++i) {
    const double exact = std::sqrt(2.0) * sech(g->r[i]);
    err = std::max({err, std::abs(sol.pair.u()[i] - exact), std::abs(sol.pair.v()[i] - exact)});
  }
  EXPECT_LT(err, 1e-3);
  ASSERT_TRUE(sol.hamiltonian_residual.has_value());
  EXPECT_LT(*sol.hamiltonian_residual, 1e-3);
  expect_solution_invariants(sol);
}

TEST(Solve, DecoupledMatchesSingleComponentGroundStates) {
  const Params cases[] = {{2, 1.5, 1.5, 0.0}, {3, 1.6, 1.2, 0.0}, {1, 2.5, 2.0, 0.0}};
  for (const auto& params : cases) {
    const auto g = make_grid(params.n, 15.0, 600);
    const auto sol = solve(params, g);
    EXPECT_NEAR(sol.kappa / decoupled_kappa(params, g), 1.0, 1e-3) << "n=" << params.n;
  }
}

TEST(Solve, WeakRepulsionOnLine) {
  const auto g = make_grid(1, 30.0, 3000);
  const auto sol = solve(Params{1, 2.0, 1.0, -0.2}, g);
  // For ω = 1 and weak repulsion the minimizer is the symmetric state with
  // u = v = u0/√(1+b), so κ = 2c0/(1+b).
  EXPECT_NEAR(sol.kappa, (8.0 / 3.0) / 0.8, 1e-3);
  ASSERT_TRUE(sol.hamiltonian_residual.has_value());
  EXPECT_LE(*sol.hamiltonian_residual, 1e-3);
  expect_solution_invariants(sol);
}

TEST(Solve, PlanarRepulsionBetweenDecoupledAndPartition) {
  const Params params{2, 2.0, 1.0, -1.0};
  const auto g = make_grid(2, 15.0, 750);
  const auto sol = solve(params, g);
  const double lower = decoupled_kappa(params.with_b(0.0), g);
  const double upper = partition_kappa(partition_ground(params, g));
  EXPECT_GT(sol.kappa, lower);
  EXPECT_LT(sol.kappa, upper);
  expect_solution_invariants(sol);
}

TEST(Solve, IndependentOfSeed) {
  const Params params{2, 2.0, 1.0, -1.0};
  const auto g = make_grid(2, 15.0, 750);
  const double reference = solve(params, g).kappa;
  std::mt19937_64 rng(83);
  for (int k = 0; k < 5; ++k) {
    const auto sol = solve_ground(params, g, centred_random_pair(g, params, rng));
    EXPECT_NEAR(sol.kappa, reference, 1e-4 * reference) << "seed " << k;
  }
}

TEST(Solve, RejectsBadInput) {
  const auto g = make_grid(1, 10.0, 100);
  EXPECT_THROW(solve(Params{1, 2.0, 1.0, 0.5}, g), InvalidArgument);
  EXPECT_THROW(solve(Params{2, 2.0, 1.0, 0.0}, g), InvalidArgument);
  const Pair degenerate(sample_dirichlet(g, [](double r) { return sech(r); }), Field(g), 2.0, 1.0);
  EXPECT_THROW(solve_ground(Params{}, g, degenerate), DegenerateComponent);
}

TEST(Sweep, SegregationTrend) {
  const Params base{2, 2.0, 1.0, 0.0};
  const auto g = make_grid(2, 15.0, 750);
  const auto sweep = continuation_sweep(base, {-1.0, -10.0, -100.0}, g);
  const double limit = partition_kappa(partition_ground(base, g));
  ASSERT_EQ(sweep.records.size(), 3u);
  for (std::size_t k = 0; k < sweep.records.size(); ++k) {
    const auto& r = sweep.records[k];
    ASSERT_FALSE(r.error.has_value()) << *r.error;
    EXPECT_LE(r.kappa, limit + 1e-6);
    if (k > 0) {
      EXPECT_GT(r.kappa, sweep.records[k - 1].kappa);
      EXPECT_LT(r.scaled_overlap, sweep.records[k - 1].scaled_overlap);
    }
  }
  EXPECT_THROW(continuation_sweep(base, {-1.0, -0.5}, g), InvalidArgument);
  EXPECT_THROW(continuation_sweep(base, {0.5}, g), InvalidArgument);
}

TEST(Partition, ComponentsAreDisjoint) {
  const Params params{2, 2.0, 1.3, -5.0};
  const auto g = make_grid(2, 12.0, 600);
  const auto sol = partition_ground(params, g);
  EXPECT_EQ(sol.pair.norms().uv_q, 0.0);
  ASSERT_TRUE(sol.interface_radius.has_value());
  EXPECT_GT(*sol.interface_radius, 0.0);
  EXPECT_LT(*sol.interface_radius, g->R);
  EXPECT_NEAR(sol.j_hat, j_bar(sol.pair), 1e-10 * sol.j_hat);
  EXPECT_THROW(partition_ground(Params{1, 2.0, 1.0, -5.0}, make_grid(1, 12.0, 600)), DimensionError);
}

TEST(DomainStudy, NonincreasingAndConverged) {
  DomainStudyOptions opt;
  opt.h = 0.02;
  const auto study = domain_convergence_study(Params{1, 2.0, 1.0, -0.2}, {10.0, 20.0, 40.0}, opt);
  ASSERT_EQ(study.size(), 3u);
  for (std::size_t k = 0; k < study.size(); ++k) {
    ASSERT_FALSE(study[k].error.has_value()) << *study[k].error;
    if (k > 0) {
      EXPECT_LE(study[k].kappa, study[k - 1].kappa + 1e-9);
    }
  }
  EXPECT_LE(study[1].kappa - study[2].kappa, 1e-4);
  EXPECT_THROW(domain_convergence_study(Params{}, {20.0, 10.0}, opt), InvalidArgument);
}

TEST(Resample, PreservesProfileAndExtendsByZero) {
  const auto coarse = make_grid(1, 10.0, 499);
  const auto fine = make_grid(1, 20.0, 1999);
  const Field f = sample_dirichlet(coarse, [](double r) { return std::exp(-r * r / 4.0); });
  const Field out = resample(f, fine);
  for (std::size_t i = 0; i < fine->size(); ++i) {
    const double r = fine->r[i];
    if (r >= 10.0) {
      EXPECT_EQ(out[i], 0.0);
    } else if (r < 9.0) {
      EXPECT_NEAR(out[i], std::exp(-r * r / 4.0), 2e-4);
    }
  }
}

TEST(Bstar, RequiresOneDimension) {
  EXPECT_THROW(estimate_bstar(Params{2, 2.0, 1.0, 0.0}, make_grid(2, 10.0, 100)), DimensionError);
}

TEST(Bstar, ConsistentBracketAboveUnitFrequency) {
  BstarOptions opt;
  opt.depth = 6;
  const auto est = estimate_bstar(Params{1, 2.0, 2.0, 0.0}, make_grid(1, 40.0, 999), opt);
  EXPECT_TRUE(est.consistent());
  EXPECT_GE(est.lo, nonexistence_bound(2.0, 2.0));
  EXPECT_LE(est.hi, corollary_bound(2.0, 2.0));
  EXPECT_LE(est.estimate, bstar_upper(2.0, 2.0));
  EXPECT_EQ(est.trials.size(), 8u);
  EXPECT_NEAR(est.kappa_infinity, 40.0 / 3.0, 1e-12);
}
