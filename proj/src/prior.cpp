#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bvm/bayes.hpp"

namespace bvm {

void PriorSpec::validate(int d) const {
  if (d != 1 && d != 2) throw std::invalid_argument("prior: dimension must be 1 or 2");
  if (!(gamma > 1.0 + 0.5 * d)) {
    std::ostringstream msg;
    msg << "prior.gamma: need gamma > 1 + d/2 = " << 1.0 + 0.5 * d << ", got " << gamma;
    throw std::invalid_argument(msg.str());
  }
  if (N < 1) throw std::invalid_argument("prior.N: need at least one observation");
  if (!(rho_scale > 0.0)) throw std::invalid_argument("prior.rho_scale: must be positive");
}

double PriorSpec::delta(int d) const {
  validate(d);
  return std::pow(static_cast<double>(N), -gamma / (2.0 * gamma + d));
}

double PriorSpec::rho(int d) const {
  return rho_scale / (std::sqrt(static_cast<double>(N)) * delta(d));
}

Eigen::VectorXd prior_sd_vector(const PriorSpec& prior, const CutPtr& cut) {
  prior.validate(cut->dim());
  double r = prior.rho(cut->dim());
  const int J = static_cast<int>(cut->size());
  Eigen::VectorXd sd = Eigen::VectorXd::Zero(J);
  for (int j = 1; j < J; ++j)
    sd[j] = r * std::pow(cut->eigenvalue(j), -0.5 * prior.gamma);
  return sd;
}

SpectralField sample_prior(const PriorSpec& prior, const CutPtr& cut, Rng& rng) {
  Eigen::VectorXd sd = prior_sd_vector(prior, cut);
  Eigen::VectorXd r(sd.size());
  r[0] = 0.0;
  for (int j = 1; j < sd.size(); ++j) r[j] = sd[j] * rng.normal();
  return from_real_coords(cut, r);
}

}  // namespace bvm
