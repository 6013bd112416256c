#pragma once

// Reference implementations used only by tests: direct-summation transforms,
// dense-grid quadrature for torus coefficients, and a method-of-lines
// finite-difference integrator for the 1-d reaction-diffusion equation.
// Everything here is deliberately independent of the solver code paths.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bvm/frequency_cut.hpp"
#include "bvm/spectral_field.hpp"

namespace oracle {

// u(x_m) = sum_j c_j exp(2 pi i k_j . x_m) by direct summation
inline Eigen::VectorXd naive_synthesize(const bvm::SpectralField& f, int M) {
  const auto& cut = f.cut();
  std::size_t n = cut.dim() == 1 ? M : static_cast<std::size_t>(M) * M;
  Eigen::VectorXd out(n);
  for (std::size_t m = 0; m < n; ++m) {
    double x0, x1 = 0.0;
    if (cut.dim() == 1) {
      x0 = static_cast<double>(m) / M;
    } else {
      x0 = static_cast<double>(m / M) / M;
      x1 = static_cast<double>(m % M) / M;
    }
    std::complex<double> acc = 0.0;
    for (int j = 0; j < cut.size(); ++j) {
      const auto& k = cut.wavevector(j);
      double a = 2.0 * M_PI * (k[0] * x0 + k[1] * x1);
      acc += f.coeff(j) * std::complex<double>(std::cos(a), std::sin(a));
    }
    out[m] = acc.real();
  }
  return out;
}

// c_j = (1/M^d) sum_m u(x_m) exp(-2 pi i k_j . x_m) by direct summation
inline Eigen::VectorXcd naive_analyze(const bvm::FrequencyCut& cut,
                                      const Eigen::VectorXd& grid, int M) {
  std::size_t n = cut.dim() == 1 ? M : static_cast<std::size_t>(M) * M;
  if (static_cast<std::size_t>(grid.size()) != n)
    throw std::invalid_argument("naive_analyze: bad grid size");
  Eigen::VectorXcd c(cut.size());
  for (int j = 0; j < cut.size(); ++j) {
    const auto& k = cut.wavevector(j);
    std::complex<double> acc = 0.0;
    for (std::size_t m = 0; m < n; ++m) {
      double x0, x1 = 0.0;
      if (cut.dim() == 1) {
        x0 = static_cast<double>(m) / M;
      } else {
        x0 = static_cast<double>(m / M) / M;
        x1 = static_cast<double>(m % M) / M;
      }
      double a = -2.0 * M_PI * (k[0] * x0 + k[1] * x1);
      acc += grid[m] * std::complex<double>(std::cos(a), std::sin(a));
    }
    c[j] = acc / static_cast<double>(n);
  }
  return c;
}

// <e_k, h> for a callable h on [0,1), periodic trapezoid rule (d=1)
inline std::complex<double> dense_coeff(const std::function<double(double)>& h,
                                        int k, int n_quad = 4096) {
  std::complex<double> acc = 0.0;
  for (int m = 0; m < n_quad; ++m) {
    double x = static_cast<double>(m) / n_quad;
    double a = -2.0 * M_PI * k * x;
    acc += h(x) * std::complex<double>(std::cos(a), std::sin(a));
  }
  return acc / static_cast<double>(n_quad);
}

// int_0^1 h(x)^2 dx, periodic trapezoid rule
inline double dense_l2sq(const std::function<double(double)>& h, int n_quad = 4096) {
  double acc = 0.0;
  for (int m = 0; m < n_quad; ++m) {
    double v = h(static_cast<double>(m) / n_quad);
    acc += v * v;
  }
  return acc / n_quad;
}

// Method-of-lines reference for  u_t = u_xx + f(u)  on the periodic unit
// interval: 4th-order central Laplacian on N points, classical RK4 with a
// fixed step.  Returns the grid values at the requested times (which must be
// nonnegative multiples of dt up to rounding).
class FdRk4 {
 public:
  FdRk4(int N, double dt) : N_(N), dt_(dt) {}

  Eigen::MatrixXd run(const Eigen::VectorXd& u0,
                      const std::function<double(double)>& f,
                      const std::vector<double>& times) const {
    Eigen::MatrixXd out(N_, times.size());
    Eigen::VectorXd u = u0;
    double t = 0.0;
    for (std::size_t c = 0; c < times.size(); ++c) {
      long nsteps = std::lround((times[c] - t) / dt_);
      if (nsteps < 0) throw std::invalid_argument("FdRk4: times must be increasing");
      for (long s = 0; s < nsteps; ++s) {
        Eigen::VectorXd k1 = rhs(u, f);
        Eigen::VectorXd k2 = rhs(u + 0.5 * dt_ * k1, f);
        Eigen::VectorXd k3 = rhs(u + 0.5 * dt_ * k2, f);
        Eigen::VectorXd k4 = rhs(u + dt_ * k3, f);
        u += (dt_ / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      }
      t += nsteps * dt_;
      out.col(c) = u;
    }
    return out;
  }

 private:
  Eigen::VectorXd rhs(const Eigen::VectorXd& u,
                      const std::function<double(double)>& f) const {
    Eigen::VectorXd r(N_);
    double h2 = 1.0 / (N_ * static_cast<double>(N_));  // h = 1/N
    for (int i = 0; i < N_; ++i) {
      double um2 = u[(i - 2 + N_) % N_], um1 = u[(i - 1 + N_) % N_];
      double up1 = u[(i + 1) % N_], up2 = u[(i + 2) % N_];
      double lap = (-um2 + 16.0 * um1 - 30.0 * u[i] + 16.0 * up1 - up2) / (12.0 * h2);
      r[i] = lap + (f ? f(u[i]) : 0.0);
    }
    return r;
  }

  int N_;
  double dt_;
};

// W1 between equal-size empirical measures as an assignment problem over all
// couplings (feasible for n <= 8)
inline double w1_assignment(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const int n = static_cast<int>(a.size());
  if (b.size() != n) throw std::invalid_argument("w1_assignment: size mismatch");
  if (n > 8) throw std::invalid_argument("w1_assignment: too large for brute force");
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;
  double best = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (int i = 0; i < n; ++i) cost += std::abs(a[i] - b[perm[i]]);
    best = std::min(best, cost);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / n;
}

}  // namespace oracle
