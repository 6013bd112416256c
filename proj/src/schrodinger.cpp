#include "bvm/schrodinger.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>
#include <stdexcept>

#include "bvm/grid_transform.hpp"
#include "json.hpp"

namespace bvm {

namespace {

double l1_coefficient_norm(const Eigen::VectorXcd& c) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < c.size(); ++j) s += std::abs(c[j]);
  return s;
}

}  // namespace

PotentialPath::PotentialPath(CutPtr cut_in, std::vector<double> times_in,
                             std::vector<Eigen::VectorXcd> values_in)
    : cut(std::move(cut_in)), times(std::move(times_in)), values(std::move(values_in)) {
  if (times.empty() || times.size() != values.size())
    throw std::invalid_argument("potential path: times/values size mismatch");
  for (std::size_t i = 0; i + 1 < times.size(); ++i)
    if (!(times[i] < times[i + 1]))
      throw std::invalid_argument("potential path: times must be ascending");
  for (const auto& v : values) {
    if (v.size() != cut->size())
      throw std::invalid_argument("potential path: slice size mismatch");
    bound = std::max(bound, l1_coefficient_norm(v));
  }
}

int PotentialPath::index_at(double t) const {
  auto it = std::upper_bound(times.begin(), times.end(), t + 1e-12);
  int i = static_cast<int>(it - times.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(times.size()) - 1);
}

PotentialPath constant_potential(const SpectralField& V) {
  if (!V.is_real()) throw std::invalid_argument("potential must be real-valued");
  return PotentialPath(V.cut_ptr(), {0.0}, {V.coeffs()});
}

PotentialPath linearized_potential(const Trajectory& u, const ReactionFunction& f,
                                   int stride) {
  if (stride < 1) throw std::invalid_argument("linearized_potential: stride >= 1");
  const CutPtr& cut = u.cut;
  if (f.is_zero())
    return PotentialPath(cut, {0.0}, {Eigen::VectorXcd::Zero(cut->size())});
  const int M = next_smooth(2 * (2 * cut->radius() + 1));
  std::vector<double> times;
  std::vector<Eigen::VectorXcd> values;
  const int last = static_cast<int>(u.times.size()) - 1;
  for (int n = 0; n <= last; n += stride) {
    times.push_back(u.times[n]);
    values.push_back(pointwise_compose(f.deriv, u.at(n), M).coeffs());
  }
  return PotentialPath(cut, std::move(times), std::move(values));
}

Eigen::MatrixXd multiplication_matrix(const SpectralField& W, const FrequencyCut& cut) {
  if (!W.is_real()) throw std::invalid_argument("potential must be real-valued");
  const FrequencyCut& wc = W.cut();
  if (wc.dim() != cut.dim())
    throw std::invalid_argument("multiplication_matrix: dimension mismatch");
  const int J = cut.size();
  const auto& c = W.coeffs();

  auto what = [&](const std::array<int, 2>& p, const std::array<int, 2>& q) {
    std::array<int, 2> diff{p[0] - q[0], p[1] - q[1]};
    int idx = wc.index_of(diff);
    return idx < 0 ? std::complex<double>(0.0, 0.0) : c[idx];
  };

  // chart column b has complex weights s(p) at rows p in {b, neg(b)}:
  //   b = 0: s(0) = 1
  //   cos slot b (representative): s(b) = s(nb) = 1/sqrt(2)
  //   sin slot b: s(nb) = -i/sqrt(2) at the representative row nb, s(b) = conj
  auto weights = [&](int b, std::complex<double>& at_b, std::complex<double>& at_nb) {
    const double inv = 1.0 / std::sqrt(2.0);
    int nb = cut.negation(b);
    if (nb == b) {
      at_b = 1.0;
      at_nb = 0.0;
    } else if (b < nb) {
      at_b = inv;
      at_nb = inv;
    } else {
      at_b = std::complex<double>(0.0, inv);
      at_nb = std::complex<double>(0.0, -inv);
    }
  };

  Eigen::MatrixXd A(J, J);
  for (int a = 0; a < J; ++a) {
    std::complex<double> sa, sna;
    weights(a, sa, sna);
    int na = cut.negation(a);
    for (int b = 0; b < J; ++b) {
      std::complex<double> sb, snb;
      weights(b, sb, snb);
      int nb = cut.negation(b);
      std::complex<double> acc =
          std::conj(sa) * sb * what(cut.wavevector(a), cut.wavevector(b));
      if (nb != b)
        acc += std::conj(sa) * snb * what(cut.wavevector(a), cut.wavevector(nb));
      if (na != a) {
        acc += std::conj(sna) * sb * what(cut.wavevector(na), cut.wavevector(b));
        if (nb != b)
          acc += std::conj(sna) * snb * what(cut.wavevector(na), cut.wavevector(nb));
      }
      A(a, b) = acc.real();
    }
  }
  return 0.5 * (A + A.transpose());
}

SchrodingerSpectrum elliptic_spectrum(const SpectralField& W, const CutPtr& cut) {
  const int J = cut->size();
  const double wbar = l1_coefficient_norm(W.coeffs());
  Eigen::MatrixXd H = multiplication_matrix(W, *cut);
  for (int j = 0; j < J; ++j) H(j, j) += cut->eigenvalue(j) + wbar + 1.0;

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  if (es.info() != Eigen::Success) {
    std::ostringstream msg;
    msg << "elliptic_spectrum: eigensolve failed (J=" << J
        << ", |H|=" << H.norm() << ", bound=" << wbar << ")";
    throw std::runtime_error(msg.str());
  }

  SchrodingerSpectrum spec{W, cut, wbar, es.eigenvalues(),
                           es.eigenvalues().array() - wbar - 1.0, es.eigenvectors()};
  return spec;
}

int kernel_dimension(const SchrodingerSpectrum& spec, double tol) {
  if (tol < 0.0) tol = 1e-8 * (1.0 + spec.bound);
  int n = 0;
  for (Eigen::Index j = 0; j < spec.eigvals.size(); ++j)
    if (std::abs(spec.eigvals[j]) <= tol) ++n;
  return n;
}

SpectralField frozen_step(const SpectralField& h, const SchrodingerSpectrum& spec,
                          double tau) {
  if (tau < 0.0) throw std::invalid_argument("frozen_step: tau must be >= 0");
  if (!(*h.cut_ptr() == *spec.cut))
    throw std::invalid_argument("frozen_step: cut mismatch");
  Eigen::VectorXd y = spec.eigvecs.transpose() * to_real_coords(h);
  y.array() *= (-tau * spec.eigvals.array()).exp();
  return from_real_coords(spec.cut, spec.eigvecs * y);
}

std::string spectrum_to_json(const SchrodingerSpectrum& spec, double tol) {
  nlohmann::json j;
  bool ok = true;
  for (Eigen::Index i = 0; i < spec.eigvals_shifted.size(); ++i) {
    double lam = spec.cut->eigenvalue(static_cast<int>(i));
    double v = spec.eigvals_shifted[i];
    if (v < lam + 1.0 - tol || v > lam + 2.0 * spec.bound + 1.0 + tol) ok = false;
  }
  j["eigvals"] = std::vector<double>(spec.eigvals.begin(), spec.eigvals.end());
  j["eigvals_shifted"] =
      std::vector<double>(spec.eigvals_shifted.begin(), spec.eigvals_shifted.end());
  j["bound_check"] = ok;
  return j.dump();
}

}  // namespace bvm
