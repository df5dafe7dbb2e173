// Command-line front end for the radial ground-state solver.
//
//   nlsys solve          --n 2 --q 2 --omega 1 --b -1 --R 20 --m 2000
//   nlsys sweep          --n 2 --b-list -1,-10,-100
//   nlsys partition      --n 2 --R 15 --m 1500
//   nlsys domain-study   --b -2 --R-list 10,20,40 --h 0.01
//   nlsys thresholds     --omega 1 --q 2
//   nlsys estimate-bstar --omega 1 --q 2 --R 40 --m 1999
//   nlsys verify         --csv sweep.csv --n 2
//
// Exit codes: 0 ok, 1 solver failure or failed verification, 2 invalid
// configuration, 3 I/O or file format error.

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "nlsys/nlsys.hpp"

namespace fs = std::filesystem;

namespace {

enum ExitCode { kOk = 0, kSolverFailure = 1, kConfigError = 2, kIoError = 3 };

struct RunConfig {
  std::string command;
  nlsys::Params params;
  double R = 30.0;
  int m = 3000;
  double h = 0.01;
  std::vector<double> b_list;
  std::vector<double> R_list;
  std::string out_dir;
  std::string file;  // solution file path (solve/partition) or CSV (verify)
  unsigned workers = 0;
  std::uint64_t seed = 20130315;
  int max_iterations = 50000;
  double stall_tolerance = 1e-12;
  double slope_tolerance = 1e-11;
  int envelope_checks = 0;
  int depth = 8;
  bool numeric = false;
  double kappa_inf = 0.0;  // verify: reference segregated level (0 = compute)

  void validate() const {
    params.validate();
    if (!(R > 0.0)) throw nlsys::InvalidArgument("R must be positive");
    if (m < 16) throw nlsys::InvalidArgument("m must be >= 16");
    if (!(h > 0.0)) throw nlsys::InvalidArgument("h must be positive");
    if (!(stall_tolerance > 0.0) || !(slope_tolerance >= 0.0)) throw nlsys::InvalidArgument("tolerances must be positive");
    if (max_iterations < 1) throw nlsys::InvalidArgument("max-iterations must be positive");
    if (depth < 1) throw nlsys::InvalidArgument("depth must be positive");
  }

  [[nodiscard]] nlsys::SolveOptions solve_options() const {
    nlsys::SolveOptions o;
    o.max_iterations = max_iterations;
    o.stall_tolerance = stall_tolerance;
    o.slope_tolerance = slope_tolerance;
    o.rng_seed = seed;
    o.envelope_checks = envelope_checks;
    o.workers = workers;
    return o;
  }

  [[nodiscard]] fs::path output_path(const std::string& name) const {
    const fs::path dir = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw nlsys::IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    return dir / name;
  }
};

using nlsys::format_real;

void print_solution(const nlsys::Solution& sol, const fs::path& path) {
  std::printf("kappa=%s j_hat=%s s=%s t=%s nehari_rel=%.3e el_residual=%.3e", format_real(sol.kappa).c_str(),
              format_real(sol.j_hat).c_str(), format_real(sol.scaling.s).c_str(), format_real(sol.scaling.t).c_str(),
              sol.residuals.relative(sol.pair.norms()), sol.el_residual);
  if (sol.hamiltonian_residual) std::printf(" hamiltonian_residual=%.3e", *sol.hamiltonian_residual);
  if (sol.interface_radius) std::printf(" interface_radius=%s", format_real(*sol.interface_radius).c_str());
  std::printf(" overlap=%.6e iterations=%d [%s] -> %s\n", sol.pair.norms().uv_q, sol.iterations, sol.label.c_str(),
              path.string().c_str());
}

int cmd_solve(const RunConfig& cfg) {
  const auto grid = nlsys::make_grid(cfg.params.n, cfg.R, cfg.m);
  const auto sol = nlsys::solve(cfg.params, grid, cfg.solve_options());
  const fs::path path = cfg.file.empty() ? cfg.output_path("solution.sol") : fs::path(cfg.file);
  nlsys::store(sol, path.string());
  print_solution(sol, path);
  return kOk;
}

int cmd_partition(const RunConfig& cfg) {
  const auto grid = nlsys::make_grid(cfg.params.n, cfg.R, cfg.m);
  nlsys::PartitionOptions opt;
  opt.solve = cfg.solve_options();
  const auto sol = nlsys::partition_ground(cfg.params, grid, opt);
  const fs::path path = cfg.file.empty() ? cfg.output_path("partition.sol") : fs::path(cfg.file);
  nlsys::store(sol, path.string());
  print_solution(sol, path);
  return kOk;
}

int cmd_sweep(const RunConfig& cfg) {
  if (cfg.b_list.empty()) throw nlsys::InvalidArgument("sweep needs --b-list");
  const auto grid = nlsys::make_grid(cfg.params.n, cfg.R, cfg.m);
  const auto result = nlsys::continuation_sweep(cfg.params, cfg.b_list, grid, cfg.solve_options());
  bool failed = false;
  for (const auto& r : result.records) {
    if (r.error) {
      failed = true;
      std::printf("b=%s error: %s\n", format_real(r.b).c_str(), r.error->c_str());
    } else {
      std::printf("b=%s kappa=%s overlap=%.6e scaled_overlap=%.6e iterations=%d\n", format_real(r.b).c_str(),
                  format_real(r.kappa).c_str(), r.overlap, r.scaled_overlap, r.iterations);
    }
  }
  const fs::path path = cfg.file.empty() ? cfg.output_path("sweep.csv") : fs::path(cfg.file);
  nlsys::write_text(path.string(), nlsys::sweep_table(result.records).str());
  std::printf("wrote %s\n", path.string().c_str());

  // Two-cell partition level next to the most repulsive continuation value.
  if (cfg.params.n >= 2) {
    const nlsys::SweepRecord* last = nullptr;
    for (const auto& r : result.records)
      if (!r.error) last = &r;
    nlsys::PartitionOptions opt;
    opt.solve = cfg.solve_options();
    const double part = nlsys::partition_kappa(nlsys::partition_ground(cfg.params, grid, opt));
    if (last) {
      const double gap = (part - last->kappa) / part;
      std::printf("partition_kappa=%s continuation_kappa=%s (b=%s) relative_gap=%.4f%s\n", format_real(part).c_str(),
                  format_real(last->kappa).c_str(), format_real(last->b).c_str(), gap,
                  std::abs(gap) > 0.01 ? " DISAGREE(>1%)" : "");
    }
  }
  return failed ? kSolverFailure : kOk;
}

int cmd_domain_study(const RunConfig& cfg) {
  if (cfg.R_list.empty()) throw nlsys::InvalidArgument("domain-study needs --R-list");
  nlsys::DomainStudyOptions opt;
  opt.h = cfg.h;
  opt.solve = cfg.solve_options();
  const auto records = nlsys::domain_convergence_study(cfg.params, cfg.R_list, opt);
  bool failed = false;
  for (const auto& r : records) {
    if (r.error) {
      failed = true;
      std::printf("R=%s error: %s\n", format_real(r.R).c_str(), r.error->c_str());
    } else {
      std::printf("R=%s m=%d kappa=%s iterations=%d\n", format_real(r.R).c_str(), r.m, format_real(r.kappa).c_str(),
                  r.iterations);
    }
  }
  const fs::path path = cfg.file.empty() ? cfg.output_path("domain_study.csv") : fs::path(cfg.file);
  nlsys::write_text(path.string(), nlsys::domain_table(records).str());
  std::printf("wrote %s\n", path.string().c_str());
  return failed ? kSolverFailure : kOk;
}

int cmd_thresholds(const RunConfig& cfg) {
  const double om = cfg.params.omega, q = cfg.params.q;
  auto report = nlsys::threshold_report(om, q);
  if (cfg.numeric) {
    nlsys::Params p = cfg.params;
    p.n = 1;
    nlsys::BstarOptions opt;
    opt.depth = cfg.depth;
    report.bstar_numeric = nlsys::estimate_bstar(p, nlsys::make_grid(1, cfg.R, cfg.m), opt).estimate;
  }
  std::printf("omega: %s\nq: %s\n", format_real(om).c_str(), format_real(q).c_str());
  std::printf("kappa_infinity_1d: %s\n", format_real(nlsys::kappa_infinity_1d(om, q)).c_str());
  if (report.nonexistence_bound)
    std::printf("nonexistence_bound: %s\n", format_real(*report.nonexistence_bound).c_str());
  else
    std::printf("nonexistence_bound: undefined (q > 2)\n");
  std::printf("corollary_bound: %s\n", format_real(report.corollary_bound).c_str());
  std::printf("bstar_upper_testfamily: %s\n", format_real(report.bstar_upper_testfamily).c_str());
  if (report.bstar_numeric) std::printf("bstar_numeric: %s\n", format_real(*report.bstar_numeric).c_str());

  nlsys::CsvTable t({"omega", "q", "nonexistence_bound", "corollary_bound", "bstar_upper_testfamily", "bstar_numeric"});
  t.add_row({format_real(om), format_real(q),
             report.nonexistence_bound ? format_real(*report.nonexistence_bound) : std::string("nan"),
             format_real(report.corollary_bound), format_real(report.bstar_upper_testfamily),
             report.bstar_numeric ? format_real(*report.bstar_numeric) : std::string("nan")});
  const fs::path path = cfg.file.empty() ? cfg.output_path("thresholds.csv") : fs::path(cfg.file);
  nlsys::write_text(path.string(), t.str());
  return kOk;
}

int cmd_estimate_bstar(const RunConfig& cfg) {
  nlsys::BstarOptions opt;
  opt.depth = cfg.depth;
  opt.solve.rng_seed = cfg.seed;
  opt.solve.workers = cfg.workers;
  const auto est = nlsys::estimate_bstar(cfg.params, nlsys::make_grid(1, cfg.R, cfg.m), opt);
  nlsys::CsvTable t({"b", "kappa", "attained", "ambiguous"});
  for (const auto& tr : est.trials) {
    std::printf("b=%s kappa=%s %s%s\n", format_real(tr.b).c_str(), format_real(tr.kappa).c_str(),
                nlsys::to_string(tr.status), tr.ambiguous ? " (ambiguous)" : "");
    t.add_row({format_real(tr.b), format_real(tr.kappa), tr.status == nlsys::Attainment::attained ? "1" : "0",
               tr.ambiguous ? "1" : "0"});
  }
  std::printf("estimate=%s bracket=[%s, %s] left=%s right=%s%s\n", format_real(est.estimate).c_str(),
              format_real(est.lo).c_str(), format_real(est.hi).c_str(), nlsys::to_string(est.lo_trial.status),
              nlsys::to_string(est.hi_trial.status), est.consistent() ? "" : " (inconsistent endpoints)");
  const fs::path path = cfg.file.empty() ? cfg.output_path("bstar_trials.csv") : fs::path(cfg.file);
  nlsys::write_text(path.string(), t.str());
  return kOk;
}

/// Checks a sweep CSV: κ nonincreasing in b and κ <= κ_{-∞}* (1e-6 slack).
int cmd_verify(const RunConfig& cfg) {
  if (cfg.file.empty()) throw nlsys::InvalidArgument("verify needs --csv");
  const auto table = nlsys::parse_csv(nlsys::read_text(cfg.file));
  const auto& cols = table.columns();
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      if (cols[i] == name) return i;
    throw nlsys::FormatError("CSV lacks column '" + name + "'");
  };
  const std::size_t cb = col("b"), ck = col("kappa");
  std::vector<std::pair<double, double>> rows;
  for (const auto& r : table.rows()) rows.emplace_back(std::stod(r[cb]), std::stod(r[ck]));

  double kinf = cfg.kappa_inf;
  if (kinf <= 0.0) {
    if (cfg.params.n == 1) {
      kinf = nlsys::kappa_infinity_1d(cfg.params.omega, cfg.params.q);
    } else {
      nlsys::PartitionOptions opt;
      opt.solve = cfg.solve_options();
      const auto part = nlsys::partition_ground(cfg.params, nlsys::make_grid(cfg.params.n, cfg.R, cfg.m), opt);
      kinf = part.kappa;
    }
  }
  constexpr double kSlack = 1e-6;
  int violations = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].second > kinf + kSlack) {
      ++violations;
      std::printf("row %zu: kappa=%s exceeds segregated level %s\n", i, format_real(rows[i].second).c_str(),
                  format_real(kinf).c_str());
    }
    for (std::size_t j = 0; j < rows.size(); ++j) {
      if (rows[i].first < rows[j].first && rows[i].second < rows[j].second - kSlack) {
        ++violations;
        std::printf("rows %zu,%zu: kappa not nonincreasing in b\n", i, j);
      }
    }
  }
  std::printf("verify: %zu rows, segregated level %s, %d violations\n", rows.size(), format_real(kinf).c_str(),
              violations);
  return violations ? kSolverFailure : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial ground states of a two-component nonlinear Schroedinger system"};
  app.require_subcommand(1);
  RunConfig cfg;
  if (const char* env = std::getenv("NLSYS_OUTPUT_DIR")) cfg.out_dir = env;

  app.set_help_flag("--help", "Print this help message and exit");
  app.set_config("--config", "", "Read options from a key = value file; flags override it");
  app.add_option("--n", cfg.params.n, "Space dimension");
  app.add_option("--q", cfg.params.q, "Exponent q");
  app.add_option("--omega", cfg.params.omega, "Frequency omega >= 1");
  app.add_option("--b", cfg.params.b, "Coupling b <= 0");
  app.add_option("--R", cfg.R, "Truncation radius");
  app.add_option("--m", cfg.m, "Interior grid nodes");
  app.add_option("--h", cfg.h, "Mesh width for domain-study");
  app.add_option("--b-list", cfg.b_list, "Decreasing couplings for sweep")->delimiter(',');
  app.add_option("--R-list", cfg.R_list, "Increasing radii for domain-study")->delimiter(',');
  app.add_option("--out", cfg.out_dir, "Output directory (default $NLSYS_OUTPUT_DIR or .)");
  app.add_option("--file,--csv", cfg.file, "Output file (or input CSV for verify)");
  app.add_option("--workers", cfg.workers, "Worker threads for independent seeds (default: hardware threads)");
  app.add_option("--seed", cfg.seed, "Random seed");
  app.add_option("--max-iterations", cfg.max_iterations, "Descent iteration cap");
  app.add_option("--stall-tolerance", cfg.stall_tolerance, "Relative decrease over 20 iterations that stops descent");
  app.add_option("--slope-tolerance", cfg.slope_tolerance, "Predicted log-quotient decrease per step that stops descent");
  app.add_option("--envelope-checks", cfg.envelope_checks, "Envelope gradient checks per solve");
  app.add_option("--depth", cfg.depth, "Bisection depth for estimate-bstar");
  app.add_flag("--numeric", cfg.numeric, "thresholds: also run estimate-bstar");
  app.add_option("--kappa-inf", cfg.kappa_inf, "verify: segregated level (computed when omitted)");

  const std::pair<const char*, const char*> commands[] = {
      {"solve", "Ground state for one coupling b"},
      {"sweep", "Continuation over --b-list with the partition level for n >= 2"},
      {"partition", "Two-cell segregated partition (n >= 2)"},
      {"domain-study", "Ground energy over increasing radii --R-list"},
      {"thresholds", "Closed-form one-dimensional threshold bounds"},
      {"estimate-bstar", "Bisection for the one-dimensional threshold"},
      {"verify", "Check a sweep CSV for monotonicity and the segregated bound"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (cfg.workers == 0) cfg.workers = std::max(1u, std::thread::hardware_concurrency());

  try {
    cfg.validate();
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "partition") return cmd_partition(cfg);
    if (cfg.command == "domain-study") return cmd_domain_study(cfg);
    if (cfg.command == "thresholds") return cmd_thresholds(cfg);
    if (cfg.command == "estimate-bstar") return cmd_estimate_bstar(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
  } catch (const nlsys::InvalidArgument& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfigError;
  } catch (const nlsys::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIoError;
  } catch (const nlsys::FormatError& e) {
    std::fprintf(stderr, "format error: %s\n", e.what());
    return kIoError;
  } catch (const nlsys::Error& e) {
    std::fprintf(stderr, "solver failure: %s\n", e.what());
    return kSolverFailure;
  }
  return kConfigError;
}
