#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "bvm/grid_transform.hpp"
#include "bvm/rd_solver.hpp"
#include "bvm/rng.hpp"
#include "support/oracles.hpp"

using namespace bvm;

namespace {

// theta0(x) = a sin(2 pi x)
SpectralField sine_field(const CutPtr& cut, double a) {
  SpectralField f(cut);
  f.set_coeff(cut->index_of({1, 0}), std::complex<double>(0.0, -0.5 * a));
  f.set_coeff(cut->index_of({-1, 0}), std::complex<double>(0.0, 0.5 * a));
  return f;
}

}  // namespace

TEST_CASE("heat flow is exact at grid times") {
  CutPtr cut = make_cut(1, 32);
  SpectralField theta = sine_field(cut, 1.0);
  SolverConfig cfg;
  Trajectory traj = solve_rd(theta, zero_reaction(), 0.5, cfg);
  double lam = 4.0 * M_PI * M_PI;
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    double factor = std::exp(-lam * traj.times[n]);
    Eigen::VectorXcd want = theta.coeffs() * factor;
    CHECK((traj.states.col(n) - want).norm() <= 1e-10 * factor + 1e-300);
  }

  CutPtr cut2 = make_cut(2, 4);
  SpectralField theta2(cut2);
  theta2.set_coeff(cut2->index_of({1, 2}), {0.2, 0.1});
  theta2.set_coeff(cut2->index_of({-1, -2}), {0.2, -0.1});
  Trajectory traj2 = solve_rd(theta2, zero_reaction(), 0.1, cfg);
  double lam2 = 20.0 * M_PI * M_PI;
  Eigen::VectorXcd want2 = theta2.coeffs() * std::exp(-lam2 * 0.1);
  CHECK((traj2.states.rightCols(1) - want2).norm() < 1e-12);
}

TEST_CASE("evaluate matches the closed heat solution off the grid") {
  CutPtr cut = make_cut(1, 8);
  SpectralField theta = sine_field(cut, 1.0);
  SolverConfig cfg;
  cfg.dt = 2.5e-4;
  Trajectory traj = solve_rd(theta, zero_reaction(), 0.1, cfg);
  double lam = 4.0 * M_PI * M_PI;
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    double t = 0.1 * rng.uniform();
    double x = rng.uniform();
    double want = std::exp(-lam * t) * std::sin(2.0 * M_PI * x);
    CHECK(std::abs(evaluate(traj, t, {x, 0.0}) - want) < 1e-8);
  }
}

TEST_CASE("nonlinear solver agrees with the finite-difference reference") {
  CutPtr cut = make_cut(1, 32);
  SpectralField theta = sine_field(cut, 0.5);
  ReactionFunction f = bump_reaction();
  SolverConfig cfg;
  cfg.dt = 2e-4;
  const double T = 0.05;
  Trajectory traj = solve_rd(theta, f, T, cfg);

  const int N = 512;
  oracle::FdRk4 fd(N, 1e-6);
  Eigen::MatrixXd ref = fd.run(oracle::naive_synthesize(theta, N), f.value, traj.times);

  Eigen::MatrixXd ours(N, traj.times.size());
  for (std::size_t n = 0; n < traj.times.size(); ++n)
    ours.col(n) = synthesize(traj.at(static_cast<int>(n)), N);
  double rel = (ours - ref).norm() / ref.norm();
  CHECK(rel < 1e-5);
}

TEST_CASE("equation residual is second order in dt") {
  for (auto [d, K, T] : {std::tuple{1, 16, 0.05}, std::tuple{2, 4, 0.05}}) {
    CutPtr cut = make_cut(d, K);
    SpectralField theta(cut);
    if (d == 1) {
      theta = sine_field(cut, 0.5);
    } else {
      theta.set_coeff(cut->index_of({1, 0}), {0.0, -0.25});
      theta.set_coeff(cut->index_of({-1, 0}), {0.0, 0.25});
      theta.set_coeff(cut->index_of({0, 1}), {0.1, 0.0});
      theta.set_coeff(cut->index_of({0, -1}), {0.1, 0.0});
    }
    ReactionFunction f = bump_reaction();
    SolverConfig coarse, fine;
    coarse.dt = 1e-3;
    fine.dt = 5e-4;
    double r_coarse = pde_residual(solve_rd(theta, f, T, coarse), f);
    double r_fine = pde_residual(solve_rd(theta, f, T, fine), f);
    double ratio = r_coarse / r_fine;
    CHECK(ratio > 3.5);
    CHECK(ratio < 4.5);
  }
}

TEST_CASE("picard iteration contracts") {
  CutPtr cut = make_cut(1, 16);
  SpectralField theta = sine_field(cut, 0.5);
  ReactionFunction f = bump_reaction();
  SolverConfig cfg;
  cfg.trace_picard = true;
  cfg.picard_tol = 1e-13;
  Trajectory traj = solve_rd(theta, f, 0.02, cfg);
  int checked = 0;
  for (const auto& trace : traj.picard_trace) {
    for (std::size_t i = 1; i < trace.size(); ++i) {
      CHECK(trace[i] < trace[i - 1]);
      ++checked;
    }
  }
  CHECK(checked > 0);

  // A stiff globally Lipschitz reaction: with dt this large the k = 0
  // fixed-point map has slope 5 dt >> 1 and the iteration cannot settle.
  ReactionFunction stiff;
  stiff.value = [](double u) { return 10.0 * u; };
  stiff.deriv = [](double) { return 10.0; };
  stiff.support_radius = std::numeric_limits<double>::infinity();
  stiff.label = "linear10";
  Eigen::VectorXcd with_mean = theta.coeffs();
  with_mean[0] = 0.5;
  SpectralField shifted(cut, with_mean);
  SolverConfig absurd;
  absurd.dt = 50.0;
  CHECK_THROWS_AS(solve_rd(shifted, stiff, 100.0, absurd), std::runtime_error);
}

TEST_CASE("regularity report on the heat flow") {
  CutPtr cut = make_cut(1, 8);
  SpectralField theta = sine_field(cut, 1.0);
  SolverConfig cfg;
  cfg.dt = 1e-4;
  const double T = 0.1;
  Trajectory traj = solve_rd(theta, zero_reaction(), T, cfg);
  RegularityReport rep = regularity_report(traj, {0.0, 1.0, 2.0});
  double lam = 4.0 * M_PI * M_PI;
  for (std::size_t i = 0; i < rep.gammas.size(); ++i) {
    double g = rep.gammas[i];
    // single decaying mode: sup at t = 0, energy integral in closed form
    double sup_want = std::pow(1.0 + lam, g / 2.0) * std::sqrt(0.5);
    CHECK(rep.sup_norm[i] == doctest::Approx(sup_want).epsilon(1e-10));
    double int_want = std::pow(1.0 + lam, g + 1.0) * 0.5 *
                      (1.0 - std::exp(-2.0 * lam * T)) / (2.0 * lam);
    CHECK(rep.int_sq_smooth[i] == doctest::Approx(int_want).epsilon(1e-3));
  }
}

TEST_CASE("solver validates its inputs") {
  CutPtr cut = make_cut(1, 4);
  SpectralField theta = sine_field(cut, 1.0);
  CHECK_THROWS_AS(solve_rd(theta, zero_reaction(), -1.0, {}), std::invalid_argument);
  SolverConfig bad;
  bad.dt = 0.0;
  CHECK_THROWS_AS(solve_rd(theta, zero_reaction(), 1.0, bad), std::invalid_argument);
  Trajectory traj = solve_rd(theta, zero_reaction(), 0.01, {});
  CHECK_THROWS_AS(evaluate(traj, 0.02, {0.5, 0.0}), std::invalid_argument);
}
