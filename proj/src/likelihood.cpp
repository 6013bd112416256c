#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bvm/bayes.hpp"

namespace bvm {

LikelihoodEvaluator::LikelihoodEvaluator(Dataset data, ReactionFunction f, CutPtr cut,
                                         SolverConfig solver)
    : data_(std::move(data)), f_(std::move(f)), cut_(std::move(cut)),
      solver_(std::move(solver)) {
  if (data_.d != cut_->dim())
    throw std::invalid_argument("likelihood: dataset dimension does not match the cut");
  const int N = data_.size();
  const int J = cut_->size();

  // solve_rd normalizes the step to land exactly on T
  const int steps = std::max(1, static_cast<int>(std::lround(data_.T / solver_.dt)));
  const double dt = data_.T / steps;

  basis_.resize(N, J);
  stencil_.resize(static_cast<std::size_t>(N));
  weights_ = Eigen::MatrixXd::Zero(N, 4);
  for (int i = 0; i < N; ++i) {
    if (data_.t[i] < 0.0 || data_.t[i] > data_.T * (1.0 + 1e-12))
      throw std::invalid_argument("likelihood: observation time outside [0, T]");
    std::array<double, 2> xi{data_.x(i, 0), data_.d == 2 ? data_.x(i, 1) : 0.0};
    basis_.row(i) = real_basis_at(*cut_, xi);

    // mirror the trajectory interpolation stencil: cubic on 4 points, linear
    // when the grid is too short
    if (steps < 3) {
      int n = std::min(steps - 1, std::max(0, static_cast<int>(data_.t[i] / dt)));
      double s = data_.t[i] / dt - n;
      stencil_[static_cast<std::size_t>(i)] = n;
      weights_(i, 0) = 1.0 - s;
      weights_(i, 1) = s;
    } else {
      int n = static_cast<int>(data_.t[i] / dt);
      n = std::clamp(n - 1, 0, steps - 3);
      double s = data_.t[i] / dt - n;
      stencil_[static_cast<std::size_t>(i)] = n;
      weights_(i, 0) = -(s - 1.0) * (s - 2.0) * (s - 3.0) / 6.0;
      weights_(i, 1) = s * (s - 2.0) * (s - 3.0) / 2.0;
      weights_(i, 2) = -s * (s - 1.0) * (s - 3.0) / 2.0;
      weights_(i, 3) = s * (s - 1.0) * (s - 2.0) / 6.0;
    }
  }
}

Trajectory LikelihoodEvaluator::solve(const SpectralField& theta) const {
  return solve_rd(theta, f_, data_.T, solver_);
}

Eigen::VectorXd LikelihoodEvaluator::predict(const Trajectory& traj) const {
  if (!(*traj.cut == *cut_))
    throw std::invalid_argument("likelihood: trajectory lives on a different cut");
  const int N = data_.size();
  const int J = cut_->size();
  const int last = static_cast<int>(traj.times.size()) - 1;

  Eigen::MatrixXd R(J, last + 1);
  for (int j = 0; j < J; ++j) {
    if (j == 0) {
      R.row(j) = traj.states.row(j).real();
    } else if (cut_->is_representative(j)) {
      R.row(j) = std::sqrt(2.0) * traj.states.row(j).real();
    } else {
      R.row(j) = -std::sqrt(2.0) * traj.states.row(cut_->negation(j)).imag();
    }
  }

  const int width = last < 3 ? 2 : 4;
  Eigen::VectorXd out(N);
  for (int i = 0; i < N; ++i) {
    int st = std::min(stencil_[static_cast<std::size_t>(i)], last - width + 1);
    st = std::max(st, 0);
    Eigen::VectorXd interp =
        R.middleCols(st, width) * weights_.row(i).head(width).transpose();
    out[i] = basis_.row(i).dot(interp);
  }
  return out;
}

double LikelihoodEvaluator::operator()(const SpectralField& theta) const {
  if (data_.size() == 0) return 0.0;
  if (!(theta.cut() == *cut_))
    throw std::invalid_argument("likelihood: theta lives on a different cut");
  double sd = data_.noise_sd > 0.0 ? data_.noise_sd : 1.0;
  Eigen::VectorXd r = data_.y - predict(solve(theta));
  return -0.5 * r.squaredNorm() / (sd * sd);
}

}  // namespace bvm
