#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "bvm/schrodinger.hpp"

namespace bvm {

// Eigendecompositions of -Lap + W(t_i) for every slice of a potential path
// (W = -V), built once and shared across repeated solves and flow marches.
class PropagatorCache {
 public:
  PropagatorCache(const PotentialPath& V, const CutPtr& cut);

  const SchrodingerSpectrum& slice(int i) const { return slices_[i]; }
  int size() const { return static_cast<int>(slices_.size()); }

  // columns of S advance by e^{tau (Lap + V_i)} in the real chart
  void advance(int i, double tau, Eigen::MatrixXd& S) const;

 private:
  std::vector<SchrodingerSpectrum> slices_;
};

struct LinearSolveConfig {
  double dt = 2.5e-4;
};

// d/dt U = Lap U + V(t) U + m(t), U(0) = h, integrated with the potential
// frozen at the left endpoint of each step (exact propagation per step) and
// a trapezoidal source term.  m = nullptr means m = 0; otherwise m must live
// on the same cut and step grid.
Trajectory solve_linear(const SpectralField& h, const PotentialPath& V,
                        const Trajectory* m, double T,
                        const LinearSolveConfig& cfg = {},
                        const PropagatorCache* cache = nullptr);

// Trapezoid rule for int_0^T g(t) dt on either grid.  nodes[0] = 0 and
// nodes.back() = T; weights sum to T.
struct TimeQuadrature {
  std::vector<double> nodes;
  std::vector<double> weights;
};

TimeQuadrature uniform_quadrature(double T, int slices);
// geometric nodes 0, t0, t0 r, ..., T with t0 = T * t0_frac; resolves the
// e^{-2 lambda t} layers of high modes that a uniform grid misses
TimeQuadrature graded_quadrature(double T, int slices, double t0_frac = 1e-9);

// Quadrature-weighted discretization of h -> (U_h(t_q))_q on the zero-mean
// coefficient space: block row q holds sqrt(w_q) times the real-chart flow at
// node q (all rows, including the mean slot the flow can populate).
struct LinearFlowMatrix {
  CutPtr cut;
  TimeQuadrature quad;
  Eigen::MatrixXd matrix;  // (Q * J) x (J - 1)

  Eigen::VectorXd apply(const Eigen::VectorXd& h) const { return matrix * h; }
  Eigen::VectorXd adjoint_apply(const Eigen::VectorXd& g) const {
    return matrix.transpose() * g;
  }
  Eigen::MatrixXd gram() const { return matrix.transpose() * matrix; }
};

LinearFlowMatrix build_flow_matrix(const PotentialPath& V, const CutPtr& cut,
                                   const TimeQuadrature& quad, double dt = 2.5e-4);

// sum_q w_q M(t_q)^T M(t_q) accumulated without materializing the stack; a
// constant path short-circuits to its eigenbasis, where the quadrature sum
// costs one exponential per node and mode.
Eigen::MatrixXd flow_gram(const PotentialPath& V, const CutPtr& cut,
                          const TimeQuadrature& quad, double dt = 2.5e-4);

// sup_{t in [t_min, T]} ||U_h(t)||_{H^b} / ||h||_{H^a} for one field
double smoothing_ratio(const PotentialPath& V, const SpectralField& h, double a,
                       double b, double t_min, double T, double dt = 2.5e-4);

struct ProbeConfig {
  double T = 0.5;
  double dt = 2.5e-4;
  int trials = 200;
  int quad_slices = 2048;
  std::uint64_t seed = 0;
};

// max over random rough zero-mean h (coefficient scale lambda_j^{-(a+d/2+0.1)/2})
// of smoothing_ratio; finite and stable under cut refinement
double smoothing_probe(const PotentialPath& V, const CutPtr& cut, double a, double b,
                       double t_min, const ProbeConfig& cfg = {});

// min over random zero-mean h of  int_0^T ||U_h||_{L2}^2 dt / ||h||_{H^{-1}}^2,
// evaluated through the flow gram form; strictly positive when the flow is
// injective on the cut
double stability_lower_probe(const PotentialPath& V, const CutPtr& cut,
                             const ProbeConfig& cfg = {});

}  // namespace bvm
