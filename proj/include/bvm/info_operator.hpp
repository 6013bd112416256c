#pragma once

#include <Eigen/Dense>
#include <Eigen/LU>
#include <cstdint>
#include <vector>

#include "bvm/linear_flow.hpp"

namespace bvm {

struct InfoConfig {
  double T = 0.5;
  double solver_dt = 2.5e-4;   // forward solve step
  double flow_dt = 2.5e-4;     // linear flow substep
  int quad_slices = 4096;      // time quadrature refinement
  bool graded = true;          // geometric nodes resolve the e^{-2 lambda t} layers
  int potential_stride = 1;    // subsample the potential path
};

// Gram operator of the linearized forward map on the zero-mean coefficient
// slots (constants excluded), with the time integral over [0, T] against dt.
// scriptI = D gram, D = diag(-lambda_j), is the operator inverted for the
// influence functions.
struct InfoOperator {
  CutPtr cut;
  InfoConfig config;
  Eigen::MatrixXd gram;     // (J-1) x (J-1), symmetric PSD
  Eigen::MatrixXd scriptI;  // D * gram
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;  // of scriptI
  double condition = 0.0;   // 1-norm condition estimate of scriptI
};

// forward-solves theta0, linearizes the reaction along the trajectory and
// assembles the gram matrix; theta0 must be real and zero-mean
InfoOperator assemble_info(const SpectralField& theta0, const ReactionFunction& f,
                           const CutPtr& cut, const InfoConfig& cfg = {});

// same assembly from an already-built potential path
InfoOperator info_from_potential(const PotentialPath& V, const CutPtr& cut,
                                 const InfoConfig& cfg = {});

// cache round trip: cut, config and gram are serialized; scriptI, lu and the
// condition estimate are rebuilt on load by the same arithmetic as assembly
std::string info_to_json(const InfoOperator& info);
InfoOperator info_from_json(const std::string& text);

// psi_bar solving scriptI psi_bar = D psi; the gram form then reproduces
// plain L2 pairings: <I h, I psi_bar> = <h, psi> for every zero-mean h
SpectralField fisher_inverse(const InfoOperator& info, const SpectralField& psi);

// Centered Gaussian with covariance C = B^T gram B, B the matrix of
// fisher_inverse over the basis; diagonal grows like lambda_j, so samples are
// fields of negative Sobolev order only.
struct LimitGaussian {
  CutPtr cut;
  Eigen::MatrixXd cov;      // (J-1) x (J-1)
  Eigen::MatrixXd factor;   // factor * factor^T = cov after PSD repair
  double clip_mass = 0.0;   // eigenvalue mass clipped to zero by the repair
  double sobolev_order_check = 0.0;  // smallest grid order a with summable tail
};

LimitGaussian limit_covariance(const InfoOperator& info);

// n coefficient draws scale * factor * g, one column per draw
Eigen::MatrixXd sample_limit_coeffs(const LimitGaussian& lim, int n, std::uint64_t seed,
                                    double scale = 1.0);

// draws propagated through the linear flow: one trajectory per draw
std::vector<Trajectory> sample_limit_process(const LimitGaussian& lim,
                                             const PotentialPath& V, double T, double dt,
                                             int n, std::uint64_t seed,
                                             double scale = 1.0);

}  // namespace bvm
