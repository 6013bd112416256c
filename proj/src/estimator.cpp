#include <cmath>
#include <stdexcept>

#include "bvm/bayes.hpp"

namespace bvm {

SpectralField efficient_estimator(const Dataset& data, const SpectralField& theta0,
                                  const ReactionFunction& f, const InfoOperator& info,
                                  int J) {
  const CutPtr& cut = info.cut;
  if (!(theta0.cut() == *cut))
    throw std::invalid_argument("efficient_estimator: theta0 lives on a different cut");
  if (data.d != cut->dim())
    throw std::invalid_argument("efficient_estimator: dataset dimension mismatch");
  if (data.size() < 1)
    throw std::invalid_argument("efficient_estimator: empty dataset");
  if (J < 1 || J > cut->size())
    throw std::invalid_argument("efficient_estimator: subspace size outside [1, cut]");
  const double T = info.config.T;
  if (std::abs(data.T - T) > 1e-9 * T)
    throw std::invalid_argument(
        "efficient_estimator: dataset horizon differs from the information operator");

  SolverConfig forward;
  forward.dt = info.config.solver_dt;
  Trajectory traj0 = solve_rd(theta0, f, T, forward);

  const int N = data.size();
  Eigen::VectorXd eps(N);
  for (int i = 0; i < N; ++i) {
    std::array<double, 2> xi{data.x(i, 0), data.d == 2 ? data.x(i, 1) : 0.0};
    eps[i] = data.y[i] - evaluate(traj0, data.t[i], xi);
  }

  PotentialPath V = f.is_zero()
      ? constant_potential(SpectralField(cut))
      : linearized_potential(traj0, f, info.config.potential_stride);
  PropagatorCache cache(V, cut);
  LinearSolveConfig flow;
  flow.dt = info.config.flow_dt;

  Eigen::VectorXd r0 = to_real_coords(theta0);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(cut->size());
  for (int j = 1; j < J; ++j) {
    Eigen::VectorXd unit = Eigen::VectorXd::Zero(cut->size());
    unit[j] = 1.0;
    SpectralField psi_bar = fisher_inverse(info, from_real_coords(cut, unit));
    Trajectory U = solve_linear(psi_bar, V, nullptr, T, flow, &cache);
    double corr = 0.0;
    for (int i = 0; i < N; ++i) {
      std::array<double, 2> xi{data.x(i, 0), data.d == 2 ? data.x(i, 1) : 0.0};
      corr += evaluate(U, data.t[i], xi) * eps[i];
    }
    // influence function against the design law (1/T) dt x dx: the inverse
    // against the Lebesgue gram picks up a factor T, so the replicate
    // variance matches the limit covariance T * gram^{-1}
    out[j] = r0[j] + T * corr / N;
  }
  return from_real_coords(cut, out);
}

}  // namespace bvm
