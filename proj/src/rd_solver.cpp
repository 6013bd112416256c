#include "bvm/rd_solver.hpp"

#include <cmath>
#include <stdexcept>

#include "bvm/grid_transform.hpp"

namespace bvm {

ReactionFunction zero_reaction() { return ReactionFunction{}; }

ReactionFunction bump_reaction(double A, double R) {
  ReactionFunction f;
  f.support_radius = R;
  f.label = "bump";
  f.value = [A, R](double x) {
    double u = x / R;
    double w = 1.0 - u * u;
    if (w <= 0.0) return 0.0;
    return A * x * std::exp(-1.0 / w);
  };
  f.deriv = [A, R](double x) {
    double u = x / R;
    double w = 1.0 - u * u;
    if (w <= 0.0) return 0.0;
    return A * std::exp(-1.0 / w) * (1.0 - 2.0 * u * u / (w * w));
  };
  return f;
}

namespace {

// weights of the exponential trapezoidal step: with z = lambda*dt,
//   u_{n+1} = e^{-z} u_n + dt * (wl(z) F_n + wr(z) F_{n+1}),
//   wl = (1 - (1+z)e^{-z})/z^2,   wr = (z - 1 + e^{-z})/z^2,
// the exact integral of e^{-lambda(dt-s)} against the linear interpolant of F.
void step_weights(double z, double& wl, double& wr) {
  if (z < 1e-4) {
    wl = 0.5 - z / 3.0 + z * z / 8.0;
    wr = 0.5 - z / 6.0 + z * z / 24.0;
  } else {
    double e = std::exp(-z);
    wl = (1.0 - (1.0 + z) * e) / (z * z);
    wr = (z - 1.0 + e) / (z * z);
  }
}

}  // namespace

Trajectory solve_rd(const SpectralField& theta0, const ReactionFunction& f,
                    double T, const SolverConfig& cfg) {
  if (T <= 0.0) throw std::invalid_argument("solve_rd: T must be positive");
  if (cfg.dt <= 0.0) throw std::invalid_argument("solve_rd: dt must be positive");
  const CutPtr& cut = theta0.cut_ptr();
  const int J = cut->size();
  const int steps = std::max(1, static_cast<int>(std::lround(T / cfg.dt)));
  const double dt = T / steps;
  const int M = cfg.dealias_M > 0 ? cfg.dealias_M
                                  : next_smooth(2 * (2 * cut->radius() + 1));

  Eigen::VectorXd decay(J), wl(J), wr(J);
  for (int j = 0; j < J; ++j) {
    double z = cut->eigenvalue(j) * dt;
    decay[j] = std::exp(-z);
    step_weights(z, wl[j], wr[j]);
    wl[j] *= dt;
    wr[j] *= dt;
  }

  Trajectory traj;
  traj.cut = cut;
  traj.dt = dt;
  traj.times.resize(steps + 1);
  traj.states.resize(J, steps + 1);
  traj.states.col(0) = theta0.coeffs();
  for (int n = 0; n <= steps; ++n) traj.times[n] = n * dt;

  if (f.is_zero()) {
    for (int n = 0; n < steps; ++n)
      traj.states.col(n + 1) = decay.array() * traj.states.col(n).array();
    return traj;
  }

  auto reaction_coeffs = [&](const Eigen::VectorXcd& c) {
    return pointwise_compose(f.value, SpectralField(cut, c), M).coeffs();
  };

  Eigen::VectorXcd fn = reaction_coeffs(traj.states.col(0));
  if (cfg.trace_picard) traj.picard_trace.resize(steps);
  for (int n = 0; n < steps; ++n) {
    Eigen::VectorXcd base = decay.array() * traj.states.col(n).array()
                            + wl.array() * fn.array();
    Eigen::VectorXcd u = base + (wr.array() * fn.array()).matrix();  // F_{n+1} ~ F_n
    Eigen::VectorXcd fnext;
    bool converged = false;
    for (int it = 0; it < cfg.max_picard; ++it) {
      fnext = reaction_coeffs(u);
      Eigen::VectorXcd unew = base + (wr.array() * fnext.array()).matrix();
      double delta = (unew - u).norm();
      if (cfg.trace_picard) traj.picard_trace[n].push_back(delta);
      u.swap(unew);
      if (delta <= cfg.picard_tol) {
        converged = true;
        break;
      }
    }
    if (!converged)
      throw std::runtime_error("solve_rd: Picard iteration did not converge; reduce dt");
    traj.states.col(n + 1) = u;
    fn = reaction_coeffs(u);
  }
  return traj;
}

Eigen::VectorXcd interpolate_coeffs(const Trajectory& traj, double t) {
  const int last = static_cast<int>(traj.times.size()) - 1;
  if (last < 1) throw std::invalid_argument("interpolate_coeffs: empty trajectory");
  if (t < -1e-12 || t > traj.horizon() * (1.0 + 1e-12))
    throw std::invalid_argument("interpolate_coeffs: t outside [0, T]");
  const double dt = traj.dt;
  if (last < 3) {  // not enough points for a cubic; fall back to linear
    int n = std::min(last - 1, std::max(0, static_cast<int>(t / dt)));
    double s = t / dt - n;
    return (1.0 - s) * traj.states.col(n) + s * traj.states.col(n + 1);
  }
  int n = static_cast<int>(t / dt);
  n = std::clamp(n - 1, 0, last - 3);  // 4-point stencil n..n+3 around t
  double s = t / dt - n;               // in [0,3] with target near [1,2]
  double w[4];
  w[0] = -(s - 1) * (s - 2) * (s - 3) / 6.0;
  w[1] = s * (s - 2) * (s - 3) / 2.0;
  w[2] = -s * (s - 1) * (s - 3) / 2.0;
  w[3] = s * (s - 1) * (s - 2) / 6.0;
  Eigen::VectorXcd c = w[0] * traj.states.col(n);
  for (int m = 1; m < 4; ++m) c += w[m] * traj.states.col(n + m);
  return c;
}

double evaluate(const Trajectory& traj, double t, const std::array<double, 2>& x) {
  SpectralField f(traj.cut, interpolate_coeffs(traj, t));
  return evaluate_field(f, x);
}

Eigen::MatrixXd trajectory_chart(const Trajectory& traj) {
  const auto& cut = *traj.cut;
  const int J = cut.size();
  const int n = static_cast<int>(traj.times.size());
  Eigen::MatrixXd out(J, n);
  for (int c = 0; c < n; ++c) {
    for (int j = 0; j < J; ++j) {
      const auto z = traj.states(j, c);
      if (j == 0)
        out(j, c) = z.real();
      else if (cut.is_representative(j))
        out(j, c) = std::sqrt(2.0) * z.real();
      else
        out(j, c) = -std::sqrt(2.0) * traj.states(cut.negation(j), c).imag();
    }
  }
  return out;
}

RegularityReport regularity_report(const Trajectory& traj,
                                   const std::vector<double>& gammas) {
  RegularityReport rep;
  rep.gammas = gammas;
  const int cols = static_cast<int>(traj.times.size());
  for (double g : gammas) {
    double sup = 0.0, integral = 0.0;
    for (int n = 0; n < cols; ++n) {
      SpectralField u = traj.at(n);
      sup = std::max(sup, sobolev_norm(u, {g, false}));
      double v = sobolev_norm(u, {g + 1.0, false});
      double w = (n == 0 || n == cols - 1) ? 0.5 : 1.0;
      integral += w * v * v * traj.dt;
    }
    rep.sup_norm.push_back(sup);
    rep.int_sq_smooth.push_back(integral);
  }
  return rep;
}

double pde_residual(const Trajectory& traj, const ReactionFunction& f) {
  const int last = static_cast<int>(traj.times.size()) - 1;
  if (last < 2) throw std::invalid_argument("pde_residual: need at least 3 grid times");
  const CutPtr& cut = traj.cut;
  const int M = next_smooth(2 * (2 * cut->radius() + 1));
  double worst = 0.0;
  for (int n = 1; n < last; ++n) {
    Eigen::VectorXcd r =
        (traj.states.col(n + 1) - traj.states.col(n - 1)) / (2.0 * traj.dt);
    for (int j = 0; j < cut->size(); ++j)
      r[j] += cut->eigenvalue(j) * traj.states(j, n);
    if (!f.is_zero())
      r -= pointwise_compose(f.value, traj.at(n), M).coeffs();
    worst = std::max(worst, r.norm());
  }
  return worst;
}

}  // namespace bvm
