#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "bvm/spectral_field.hpp"

namespace bvm {

// Compactly supported smooth reaction term.  An empty value callable means
// f == 0 (pure heat flow).
struct ReactionFunction {
  std::function<double(double)> value;
  std::function<double(double)> deriv;
  double support_radius = 0.0;
  std::string label = "zero";

  bool is_zero() const { return !value; }
};

ReactionFunction zero_reaction();
// f(x) = A x exp(-1/(1-(x/R)^2)) for |x| < R, 0 otherwise
ReactionFunction bump_reaction(double A = 1.0, double R = 2.0);

struct SolverConfig {
  double dt = 1e-3;
  double picard_tol = 1e-10;
  int max_picard = 32;
  int dealias_M = 0;         // 0: use next_smooth(2(2K+1))
  bool trace_picard = false; // record per-step iterate distances
};

// Coefficient path on a uniform time grid t_n = n * dt, column n of `states`
// holding the coefficients at t_n.
struct Trajectory {
  CutPtr cut;
  double dt = 0.0;
  std::vector<double> times;
  Eigen::MatrixXcd states;
  std::vector<std::vector<double>> picard_trace;  // filled when traced

  double horizon() const { return times.empty() ? 0.0 : times.back(); }
  SpectralField at(int n) const { return SpectralField(cut, states.col(n)); }
};

// Spectral solver for  du/dt - Lap u = f(u)  on the torus, periodic in space.
// Each step applies the variation-of-constants map
//   u(t+dt) = e^{dt Lap} u(t) + int_0^dt e^{(dt-s) Lap} f(u(t+s)) ds
// with f(u(t+s)) interpolated linearly over the step and the resulting
// implicit relation closed by Picard fixed-point iteration.
Trajectory solve_rd(const SpectralField& theta0, const ReactionFunction& f,
                    double T, const SolverConfig& cfg = {});

// coefficients at arbitrary t via cubic interpolation on the time grid
Eigen::VectorXcd interpolate_coeffs(const Trajectory& traj, double t);

// real chart coordinates of every grid state, one column per time
Eigen::MatrixXd trajectory_chart(const Trajectory& traj);

// cubic in time, exact spectral evaluation in space
double evaluate(const Trajectory& traj, double t, const std::array<double, 2>& x);

struct RegularityReport {
  std::vector<double> gammas;
  std::vector<double> sup_norm;       // sup_t ||u(t)||_{H^gamma}
  std::vector<double> int_sq_smooth;  // int_0^T ||u(t)||^2_{H^{gamma+1}} dt
};

RegularityReport regularity_report(const Trajectory& traj,
                                   const std::vector<double>& gammas);

// max over interior grid times of the centered-difference equation residual
//   ||(u(t+dt) - u(t-dt))/(2dt) - Lap u(t) - f(u(t))||_{L^2}
double pde_residual(const Trajectory& traj, const ReactionFunction& f);

}  // namespace bvm
