#pragma once

#include <Eigen/Dense>
#include <complex>
#include <string>

#include "bvm/frequency_cut.hpp"

namespace bvm {

// Band-limited function on the torus, stored as complex coefficients against
// the frequency cut.  Real-valued fields satisfy c(-k) = conj(c(k)).
class SpectralField {
 public:
  explicit SpectralField(CutPtr cut)
      : cut_(std::move(cut)), c_(Eigen::VectorXcd::Zero(cut_->size())) {}
  SpectralField(CutPtr cut, Eigen::VectorXcd coeffs);

  const FrequencyCut& cut() const { return *cut_; }
  const CutPtr& cut_ptr() const { return cut_; }
  const Eigen::VectorXcd& coeffs() const { return c_; }
  Eigen::VectorXcd& coeffs() { return c_; }
  std::complex<double> coeff(int j) const { return c_[j]; }
  void set_coeff(int j, std::complex<double> v) { c_[j] = v; }

  double l2_norm() const { return c_.norm(); }

  // max_j |c(-k_j) - conj(c(k_j))|
  double conjugate_symmetry_defect() const;
  bool is_real(double tol = 1e-10) const { return conjugate_symmetry_defect() <= tol; }

 private:
  CutPtr cut_;
  Eigen::VectorXcd c_;
};

// Real orthonormal chart for real fields: slot 0 <-> 1, representative slot of
// a +-k pair <-> sqrt(2) cos(2 pi k.x), partner slot <-> sqrt(2) sin(2 pi k.x).
// The map is an L^2 isometry.
Eigen::VectorXd to_real_coords(const SpectralField& f);
SpectralField from_real_coords(const CutPtr& cut, const Eigen::VectorXd& r);

// values of the real chart basis functions at a point x (x[1] ignored for d=1)
Eigen::VectorXd real_basis_at(const FrequencyCut& cut, const std::array<double, 2>& x);

// point evaluation of a real field
double evaluate_field(const SpectralField& f, const std::array<double, 2>& x);

// ||f||_{H^s}: weights (1+lambda_j)^s, or lambda_j^s over j>=1 when
// s.zero_mean is set (requires |c_0| <= 1e-12 * ||f||).
double sobolev_norm(const SpectralField& f, const SobolevIndex& s);

// L^2-orthogonal projection onto span{e_j : j <= J}
SpectralField project(const SpectralField& f, int J);

// JSON round trip: {"d":..,"K":..,"coeffs":[[re,im],...]} in lattice order
std::string field_to_json(const SpectralField& f);
SpectralField field_from_json(const std::string& text);

}  // namespace bvm
