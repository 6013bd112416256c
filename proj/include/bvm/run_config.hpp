#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bvm/lab.hpp"

namespace bvm {

// One experiment run: problem / prior / solver / experiment blocks plus the
// master seed.  The subcommand picks the driver; command-line flags may
// override individual scalars after the file is parsed.
struct RunConfig {
  std::string driver;  // bvm-theta, bvm-path, clt, coverage, probes, contraction

  // [problem]
  int d = 1;
  int K = 32;
  double T = 0.5;
  std::string reaction = "bump";  // "zero" or "bump"
  double bump_amplitude = 1.0;
  double bump_radius = 2.0;
  std::vector<double> theta0 = {0.35, -0.2, 0.1};  // chart slots 1, 2, ...
  double theta0_scale = 1.0;

  // [prior]
  double gamma = 2.0;
  double rho_scale = 1.0;

  // [solver]
  double dt = 2.5e-4;
  double flow_dt = 2.5e-4;
  int quad_slices = 4096;
  bool graded = true;
  int stride = 1;
  double picard_tol = 1e-10;

  // [experiment]
  std::vector<int> N_grid = {250, 1000, 4000};
  int N = 1000;
  int replications = 8;
  int family = 4;
  double kappa = 2.0;
  double alpha = 0.1;
  double t_min = 0.05;
  int grid = 32;
  int path_draws = 100;
  int max_draws = 400;
  std::vector<double> xi_list = {0.0, 1.0};
  double gamma_bar = 2.0;
  double zeta = 1.0;
  double ball_radius = 1.0;
  int trials = 10;
  int limit_pool = 10000;
  int target_pool = 10000;
  int psi_slot = 1;
  int steps = 200000;
  int burnin = 50000;
  int thin = 10;
  double beta0 = 0.5;

  // [io]
  std::string out = "runs";
  bool no_cache = false;  // flag only, never part of the hash

  std::uint64_t seed = 1;

  // throws std::invalid_argument naming the offending field path
  void validate() const;

  // canonical echo of everything that determines the computation; the io
  // block is placement, not content, and stays out
  std::string canonical() const;
  std::uint64_t config_hash() const;

  LabProblem problem() const;
  PriorSpec prior() const;
  PcnConfig pcn() const;
  SpectralField psi() const;  // chart unit vector at psi_slot
};

// minimal structured-text config: [section] headers and key = value lines;
// values are numbers, true/false, "strings" or [comma, lists]; # comments
RunConfig parse_run_config(const std::string& text, const std::string& driver);
RunConfig load_run_config(const std::string& path, const std::string& driver);

// runs the configured experiment and persists the report plus intermediate
// artifacts under <out>/run-<config hash>; returns 0, or 3 after logging the
// failing stage to err; call validate() before this
int run_experiment(const RunConfig& cfg, std::ostream& log, std::ostream& err);

}  // namespace bvm
