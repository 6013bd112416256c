#include "bvm/linear_flow.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>

#include "bvm/rng.hpp"

namespace bvm {

namespace {

// walk S through the frozen propagators along `nodes`, splitting each gap
// into substeps of length <= dt, and report at every node
void march_nodes(const PotentialPath& V, const PropagatorCache& cache,
                 const std::vector<double>& nodes, double dt, Eigen::MatrixXd& S,
                 const std::function<void(int)>& at_node) {
  at_node(0);
  for (std::size_t q = 1; q < nodes.size(); ++q) {
    double gap = nodes[q] - nodes[q - 1];
    int nsub = std::max(1, static_cast<int>(std::ceil(gap / dt - 1e-9)));
    double tau = gap / nsub;
    double t = nodes[q - 1];
    for (int s = 0; s < nsub; ++s) {
      cache.advance(V.index_at(t), tau, S);
      t += tau;
    }
    at_node(static_cast<int>(q));
  }
}

Eigen::MatrixXd zero_mean_columns(int J) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(J, J - 1);
  S.bottomRows(J - 1).setIdentity();
  return S;
}

}  // namespace

PropagatorCache::PropagatorCache(const PotentialPath& V, const CutPtr& cut) {
  slices_.reserve(V.values.size());
  for (const auto& v : V.values)
    slices_.push_back(elliptic_spectrum(SpectralField(V.cut, -v), cut));
}

void PropagatorCache::advance(int i, double tau, Eigen::MatrixXd& S) const {
  const SchrodingerSpectrum& spec = slices_[i];
  Eigen::MatrixXd Y = spec.eigvecs.transpose() * S;
  Y.array().colwise() *= (-tau * spec.eigvals.array()).exp();
  S.noalias() = spec.eigvecs * Y;
}

Trajectory solve_linear(const SpectralField& h, const PotentialPath& V,
                        const Trajectory* m, double T, const LinearSolveConfig& cfg,
                        const PropagatorCache* cache) {
  if (!(T > 0.0) || !(cfg.dt > 0.0))
    throw std::invalid_argument("solve_linear: T and dt must be positive");
  if (!h.is_real()) throw std::invalid_argument("solve_linear: h must be real-valued");
  const CutPtr& cut = h.cut_ptr();
  const int J = cut->size();
  const int steps = std::max(1, static_cast<int>(std::llround(T / cfg.dt)));
  const double dt = T / steps;

  if (m) {
    if (!(*m->cut == *cut) || std::abs(m->dt - dt) > 1e-9 * dt ||
        static_cast<int>(m->times.size()) < steps + 1)
      throw std::invalid_argument("solve_linear: source grid mismatch");
  }

  std::optional<PropagatorCache> local_cache;
  if (!cache) local_cache.emplace(V, cut);
  const PropagatorCache& prop = cache ? *cache : *local_cache;

  Trajectory traj;
  traj.cut = cut;
  traj.dt = dt;
  traj.times.resize(steps + 1);
  traj.states.resize(J, steps + 1);
  traj.states.col(0) = h.coeffs();

  Eigen::VectorXd r = to_real_coords(h);
  for (int n = 0; n < steps; ++n) {
    double t = n * dt;
    traj.times[n] = t;
    const SchrodingerSpectrum& spec = prop.slice(V.index_at(t));
    Eigen::VectorXd rin = r;
    if (m) rin += 0.5 * dt * to_real_coords(m->at(n));
    Eigen::VectorXd y = spec.eigvecs.transpose() * rin;
    y.array() *= (-dt * spec.eigvals.array()).exp();
    r.noalias() = spec.eigvecs * y;
    if (m) r += 0.5 * dt * to_real_coords(m->at(n + 1));
    traj.states.col(n + 1) = from_real_coords(cut, r).coeffs();
  }
  traj.times[steps] = T;
  return traj;
}

TimeQuadrature uniform_quadrature(double T, int slices) {
  if (!(T > 0.0) || slices < 1)
    throw std::invalid_argument("uniform_quadrature: need T > 0 and slices >= 1");
  TimeQuadrature q;
  const double h = T / slices;
  q.nodes.resize(slices + 1);
  q.weights.assign(slices + 1, h);
  for (int i = 0; i <= slices; ++i) q.nodes[i] = i * h;
  q.weights.front() = 0.5 * h;
  q.weights.back() = 0.5 * h;
  return q;
}

TimeQuadrature graded_quadrature(double T, int slices, double t0_frac) {
  if (!(T > 0.0) || slices < 2 || !(t0_frac > 0.0) || !(t0_frac < 1.0))
    throw std::invalid_argument("graded_quadrature: bad parameters");
  TimeQuadrature q;
  q.nodes.resize(slices + 1);
  q.nodes[0] = 0.0;
  const double t0 = T * t0_frac;
  const double rho = std::pow(1.0 / t0_frac, 1.0 / (slices - 1));
  double t = t0;
  for (int i = 1; i <= slices; ++i) {
    q.nodes[i] = std::min(t, T);
    t *= rho;
  }
  q.nodes[slices] = T;
  q.weights.assign(slices + 1, 0.0);
  for (int i = 0; i <= slices; ++i) {
    double lo = i == 0 ? q.nodes[0] : q.nodes[i - 1];
    double hi = i == slices ? q.nodes[slices] : q.nodes[i + 1];
    q.weights[i] = 0.5 * (hi - lo);
  }
  return q;
}

LinearFlowMatrix build_flow_matrix(const PotentialPath& V, const CutPtr& cut,
                                   const TimeQuadrature& quad, double dt) {
  const int J = cut->size();
  const int Q = static_cast<int>(quad.nodes.size());
  PropagatorCache cache(V, cut);
  Eigen::MatrixXd S = zero_mean_columns(J);
  LinearFlowMatrix flow{cut, quad, Eigen::MatrixXd(Q * J, J - 1)};
  march_nodes(V, cache, quad.nodes, dt, S, [&](int q) {
    flow.matrix.middleRows(q * J, J) = std::sqrt(quad.weights[q]) * S;
  });
  return flow;
}

Eigen::MatrixXd flow_gram(const PotentialPath& V, const CutPtr& cut,
                          const TimeQuadrature& quad, double dt) {
  const int J = cut->size();
  if (V.constant()) {
    SchrodingerSpectrum spec = elliptic_spectrum(SpectralField(V.cut, -V.values[0]), cut);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(J);
    for (std::size_t q = 0; q < quad.nodes.size(); ++q)
      g += quad.weights[q] * (-2.0 * quad.nodes[q] * spec.eigvals.array()).exp().matrix();
    Eigen::MatrixXd full = spec.eigvecs * g.asDiagonal() * spec.eigvecs.transpose();
    return full.block(1, 1, J - 1, J - 1);
  }
  PropagatorCache cache(V, cut);
  Eigen::MatrixXd S = zero_mean_columns(J);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(J - 1, J - 1);
  march_nodes(V, cache, quad.nodes, dt, S, [&](int q) {
    gram.noalias() += quad.weights[q] * S.transpose() * S;
  });
  return 0.5 * (gram + gram.transpose());
}

double smoothing_ratio(const PotentialPath& V, const SpectralField& h, double a,
                       double b, double t_min, double T, double dt) {
  if (!(b > a)) throw std::invalid_argument("smoothing_ratio: need b > a");
  if (!(t_min > 0.0) || !(t_min < T))
    throw std::invalid_argument("smoothing_ratio: need 0 < t_min < T");
  Trajectory traj = solve_linear(h, V, nullptr, T, {dt});
  double sup = 0.0;
  for (std::size_t n = 0; n < traj.times.size(); ++n) {
    if (traj.times[n] < t_min - 1e-12) continue;
    sup = std::max(sup, sobolev_norm(traj.at(static_cast<int>(n)), {b, false}));
  }
  return sup / sobolev_norm(h, {a, false});
}

namespace {

SpectralField rough_field(const CutPtr& cut, double a, std::uint64_t seed) {
  Rng rng(seed);
  const int J = cut->size();
  Eigen::VectorXd r = Eigen::VectorXd::Zero(J);
  const double expo = -0.5 * (a + 0.5 * cut->dim() + 0.1);
  for (int j = 1; j < J; ++j)
    r[j] = std::pow(cut->eigenvalue(j), expo) * rng.normal();
  return from_real_coords(cut, r);
}

}  // namespace

double smoothing_probe(const PotentialPath& V, const CutPtr& cut, double a, double b,
                       double t_min, const ProbeConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("smoothing_probe: trials >= 1");
  if (!(b > a)) throw std::invalid_argument("smoothing_probe: need b > a");
  if (!(t_min > 0.0) || !(t_min < cfg.T))
    throw std::invalid_argument("smoothing_probe: need 0 < t_min < T");
  PropagatorCache cache(V, cut);
  double worst = 0.0;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    SpectralField h = rough_field(cut, a, substream_seed(cfg.seed, "smoothing-probe", trial));
    Trajectory traj = solve_linear(h, V, nullptr, cfg.T, {cfg.dt}, &cache);
    double sup = 0.0;
    for (std::size_t n = 0; n < traj.times.size(); ++n) {
      if (traj.times[n] < t_min - 1e-12) continue;
      sup = std::max(sup, sobolev_norm(traj.at(static_cast<int>(n)), {b, false}));
    }
    worst = std::max(worst, sup / sobolev_norm(h, {a, false}));
  }
  return worst;
}

double stability_lower_probe(const PotentialPath& V, const CutPtr& cut,
                             const ProbeConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("stability_lower_probe: trials >= 1");
  const int J = cut->size();
  Eigen::MatrixXd gram =
      flow_gram(V, cut, graded_quadrature(cfg.T, cfg.quad_slices), cfg.dt);
  double best = std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < cfg.trials; ++trial) {
    Rng rng(substream_seed(cfg.seed, "stability-probe", trial));
    Eigen::VectorXd r(J - 1);
    for (int j = 0; j < J - 1; ++j) r[j] = rng.normal();
    double path_sq = r.dot(gram * r);
    double dual_sq = 0.0;
    for (int j = 1; j < J; ++j)
      dual_sq += r[j - 1] * r[j - 1] / (1.0 + cut->eigenvalue(j));
    best = std::min(best, path_sq / dual_sq);
  }
  return best;
}

}  // namespace bvm
