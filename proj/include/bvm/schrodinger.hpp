#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bvm/rd_solver.hpp"
#include "bvm/spectral_field.hpp"

namespace bvm {

// Time grid of the zeroth-order coefficient V(t,.) of the linear equation
//   d/dt U = Lap U + V(t) U + m(t).
// `bound` dominates sup_{t,x} |V(t,x)|; it is recomputed on construction from
// the coefficient l1 norms, which dominate the sup norm of a trigonometric
// polynomial.  A single slice means V is constant in time.
struct PotentialPath {
  CutPtr cut;
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> values;
  double bound = 0.0;

  PotentialPath(CutPtr cut_in, std::vector<double> times_in,
                std::vector<Eigen::VectorXcd> values_in);

  bool constant() const { return values.size() == 1; }
  // index of the latest grid time <= t (clamped at the ends)
  int index_at(double t) const;
  const Eigen::VectorXcd& at_time(double t) const { return values[index_at(t)]; }
};

PotentialPath constant_potential(const SpectralField& V);

// V(t) = f'(u(t,.)) along a forward trajectory, one slice per `stride`-th
// grid time.  The zero reaction yields a constant zero path.
PotentialPath linearized_potential(const Trajectory& u, const ReactionFunction& f,
                                   int stride = 1);

// Real-chart matrix of h -> P_cut(W h), the multiplication operator by W
// compressed to the cut.  Exact for band-limited W (convolution of
// coefficients); symmetric because W is real-valued.
Eigen::MatrixXd multiplication_matrix(const SpectralField& W, const FrequencyCut& cut);

// Spectral data of -Lap + W on the cut, eigensolved after the positivity
// shift W -> W + bound + 1 and shifted back.  Columns of `eigvecs` are
// orthonormal in the real chart and `eigvals` is ascending.
struct SchrodingerSpectrum {
  SpectralField W;
  CutPtr cut;
  double bound = 0.0;              // dominates sup|W|
  Eigen::VectorXd eigvals_shifted; // of -Lap + W + bound + 1
  Eigen::VectorXd eigvals;         // eigvals_shifted - bound - 1
  Eigen::MatrixXd eigvecs;
};

SchrodingerSpectrum elliptic_spectrum(const SpectralField& W, const CutPtr& cut);

// count of |eigvals| <= tol; tol < 0 selects the default 1e-8 * (1 + bound)
int kernel_dimension(const SchrodingerSpectrum& spec, double tol = -1.0);

// h -> sum_j e^{-tau lambda_j} <v_j, h> v_j over the eigenpairs of -Lap + W,
// the exact solution at time tau of d/dt u = (Lap - W) u from u(0) = h
SpectralField frozen_step(const SpectralField& h, const SchrodingerSpectrum& spec,
                          double tau);

// {"eigvals": [...], "eigvals_shifted": [...], "bound_check": true/false}
// where bound_check asserts eigvals_shifted[j] in [lam_j + 1, lam_j + 2*bound + 1]
std::string spectrum_to_json(const SchrodingerSpectrum& spec, double tol = 1e-8);

}  // namespace bvm
