#include "bvm/spectral_field.hpp"

#include <cmath>
#include <stdexcept>

#include "json.hpp"

namespace bvm {

SpectralField::SpectralField(CutPtr cut, Eigen::VectorXcd coeffs)
    : cut_(std::move(cut)), c_(std::move(coeffs)) {
  if (c_.size() != cut_->size())
    throw std::invalid_argument("SpectralField: coefficient count does not match cut");
}

double SpectralField::conjugate_symmetry_defect() const {
  double worst = 0.0;
  for (int j = 0; j < cut_->size(); ++j) {
    double d = std::abs(c_[cut_->negation(j)] - std::conj(c_[j]));
    worst = std::max(worst, d);
  }
  return worst;
}

Eigen::VectorXd to_real_coords(const SpectralField& f) {
  const FrequencyCut& cut = f.cut();
  Eigen::VectorXd r(cut.size());
  const double s2 = std::sqrt(2.0);
  for (int j = 0; j < cut.size(); ++j) {
    int jn = cut.negation(j);
    if (jn == j) {
      r[j] = f.coeff(j).real();
    } else if (j < jn) {
      r[j] = s2 * f.coeff(j).real();
      r[jn] = -s2 * f.coeff(j).imag();
    }
  }
  return r;
}

SpectralField from_real_coords(const CutPtr& cut, const Eigen::VectorXd& r) {
  if (r.size() != cut->size())
    throw std::invalid_argument("from_real_coords: size mismatch");
  Eigen::VectorXcd c(cut->size());
  const double inv_s2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < cut->size(); ++j) {
    int jn = cut->negation(j);
    if (jn == j) {
      c[j] = r[j];
    } else if (j < jn) {
      c[j] = std::complex<double>(r[j] * inv_s2, -r[jn] * inv_s2);
      c[jn] = std::conj(c[j]);
    }
  }
  return SpectralField(cut, std::move(c));
}

Eigen::VectorXd real_basis_at(const FrequencyCut& cut, const std::array<double, 2>& x) {
  Eigen::VectorXd phi(cut.size());
  const double s2 = std::sqrt(2.0);
  for (int j = 0; j < cut.size(); ++j) {
    int jn = cut.negation(j);
    if (jn == j) {
      phi[j] = 1.0;
    } else if (j < jn) {
      const auto& k = cut.wavevector(j);
      double a = 2.0 * M_PI * (k[0] * x[0] + k[1] * x[1]);
      phi[j] = s2 * std::cos(a);
      phi[jn] = s2 * std::sin(a);
    }
  }
  return phi;
}

double evaluate_field(const SpectralField& f, const std::array<double, 2>& x) {
  const FrequencyCut& cut = f.cut();
  std::complex<double> acc = 0.0;
  for (int j = 0; j < cut.size(); ++j) {
    const auto& k = cut.wavevector(j);
    double a = 2.0 * M_PI * (k[0] * x[0] + k[1] * x[1]);
    acc += f.coeff(j) * std::complex<double>(std::cos(a), std::sin(a));
  }
  return acc.real();
}

double sobolev_norm(const SpectralField& f, const SobolevIndex& s) {
  const FrequencyCut& cut = f.cut();
  double acc = 0.0;
  if (s.zero_mean) {
    if (std::abs(f.coeff(0)) > 1e-12 * f.l2_norm())
      throw std::invalid_argument("sobolev_norm: zero-mean norm of a field with mean");
    for (int j = 1; j < cut.size(); ++j)
      acc += std::pow(cut.eigenvalue(j), s.order) * std::norm(f.coeff(j));
  } else {
    for (int j = 0; j < cut.size(); ++j)
      acc += std::pow(1.0 + cut.eigenvalue(j), s.order) * std::norm(f.coeff(j));
  }
  return std::sqrt(acc);
}

SpectralField project(const SpectralField& f, int J) {
  if (J < 0 || J > f.cut().size())
    throw std::invalid_argument("project: J out of range");
  Eigen::VectorXcd c = f.coeffs();
  for (int j = J + 1; j < c.size(); ++j) c[j] = 0.0;
  return SpectralField(f.cut_ptr(), std::move(c));
}

std::string field_to_json(const SpectralField& f) {
  nlohmann::json j;
  j["d"] = f.cut().dim();
  j["K"] = f.cut().radius();
  auto& arr = j["coeffs"] = nlohmann::json::array();
  for (int i = 0; i < f.cut().size(); ++i)
    arr.push_back({f.coeff(i).real(), f.coeff(i).imag()});
  return j.dump();
}

SpectralField field_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  CutPtr cut = make_cut(j.at("d").get<int>(), j.at("K").get<int>());
  const auto& arr = j.at("coeffs");
  if (static_cast<int>(arr.size()) != cut->size())
    throw std::invalid_argument("field_from_json: coefficient count does not match cut");
  Eigen::VectorXcd c(cut->size());
  for (int i = 0; i < cut->size(); ++i)
    c[i] = std::complex<double>(arr[i][0].get<double>(), arr[i][1].get<double>());
  return SpectralField(cut, std::move(c));
}

}  // namespace bvm
