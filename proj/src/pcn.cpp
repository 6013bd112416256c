#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "bvm/bayes.hpp"

namespace bvm {

namespace {

constexpr double kBetaMin = 1e-4;

}  // namespace

Eigen::MatrixXd grid_basis(const FrequencyCut& cut, int grid) {
  const int d = cut.dim();
  const int points = d == 1 ? grid : grid * grid;
  Eigen::MatrixXd G(points, cut.size());
  for (int p = 0; p < points; ++p) {
    std::array<double, 2> x{0.0, 0.0};
    if (d == 1) {
      x[0] = static_cast<double>(p) / grid;
    } else {
      x[0] = static_cast<double>(p % grid) / grid;
      x[1] = static_cast<double>(p / grid) / grid;
    }
    G.row(p) = real_basis_at(cut, x);
  }
  return G;
}

double batch_mcse(const Eigen::VectorXd& series) {
  const int M = static_cast<int>(series.size());
  const int B = static_cast<int>(std::floor(std::sqrt(static_cast<double>(M))));
  if (B < 2) return 0.0;
  const int L = M / B;
  Eigen::VectorXd means(B);
  for (int b = 0; b < B; ++b) means[b] = series.segment(b * L, L).mean();
  double mu = means.mean();
  double var = (means.array() - mu).square().sum() / (B - 1);
  return std::sqrt(var / B);
}

PosteriorChain run_pcn(const LikelihoodEvaluator& loglik, const PriorSpec& prior,
                       const PcnConfig& cfg) {
  const CutPtr& cut = loglik.cut_ptr();
  prior.validate(cut->dim());
  if (cfg.steps < 1 || cfg.burnin < 0 || cfg.thin < 1)
    throw std::invalid_argument("run_pcn: bad step counts");
  if (!(cfg.beta0 > 0.0 && cfg.beta0 <= 1.0))
    throw std::invalid_argument("run_pcn: beta0 outside (0, 1]");

  const int J = cut->size();
  Eigen::VectorXd sd = prior_sd_vector(prior, cut);
  Rng rng(substream_seed(cfg.seed, "pcn"));

  auto draw_prior = [&](Eigen::VectorXd& xi) {
    xi[0] = 0.0;
    for (int j = 1; j < J; ++j) xi[j] = sd[j] * rng.normal();
  };
  auto eval = [&](const Eigen::VectorXd& r) {
    return loglik(from_real_coords(cut, r));
  };

  Eigen::VectorXd theta(J), xi(J), prop(J);
  draw_prior(theta);
  double ll = eval(theta);

  // dual averaging on log beta toward the target acceptance
  const double mu = std::log(cfg.beta0);
  const double da_gamma = 0.05, da_t0 = 10.0, da_kappa = 0.75;
  double hbar = 0.0;
  double logbeta = mu;
  double logbeta_bar = mu;
  auto clamp_logbeta = [](double x) {
    return std::clamp(x, std::log(kBetaMin), 0.0);
  };

  const int kept_total = cfg.steps / cfg.thin;
  PosteriorChain chain;
  chain.cut = cut;
  chain.samples.resize(J, kept_total);
  chain.loglik.resize(kept_total);

  int kept = 0;
  long accepted = 0;
  const int total = cfg.burnin + cfg.steps;
  for (int step = 1; step <= total; ++step) {
    const bool adapting = step <= cfg.burnin;
    double beta = std::exp(adapting ? clamp_logbeta(logbeta) : logbeta_bar);
    draw_prior(xi);
    prop = std::sqrt(1.0 - beta * beta) * theta + beta * xi;
    double llp = eval(prop);
    double alpha = std::min(1.0, std::exp(llp - ll));
    bool accept = rng.uniform() < alpha;
    if (accept) {
      theta.swap(prop);
      ll = llp;
    }

    if (adapting) {
      double t = static_cast<double>(step);
      hbar = (1.0 - 1.0 / (t + da_t0)) * hbar + (cfg.target_accept - alpha) / (t + da_t0);
      logbeta = clamp_logbeta(mu - std::sqrt(t) * hbar / da_gamma);
      double w = std::pow(t, -da_kappa);
      logbeta_bar = w * logbeta + (1.0 - w) * logbeta_bar;
      if (step == cfg.burnin) logbeta_bar = clamp_logbeta(logbeta_bar);
    } else {
      accepted += accept;
      int past = step - cfg.burnin;
      if (past % cfg.thin == 0 && kept < kept_total) {
        chain.samples.col(kept) = theta;
        chain.loglik[kept] = ll;
        ++kept;
      }
    }
  }
  if (cfg.burnin == 0) logbeta_bar = clamp_logbeta(mu);

  chain.beta = std::exp(logbeta_bar);
  chain.accept_rate = static_cast<double>(accepted) / cfg.steps;
  if (chain.accept_rate < 0.1 || chain.accept_rate > 0.5) {
    std::ostringstream msg;
    msg << "acceptance rate " << chain.accept_rate << " outside [0.1, 0.5]";
    chain.warnings.push_back(msg.str());
  }
  if (kept < 16) chain.warnings.push_back("chain too short for stable summaries");
  return chain;
}

SpectralField posterior_mean(const PosteriorChain& chain) {
  if (chain.samples.cols() == 0) throw std::invalid_argument("posterior_mean: empty chain");
  Eigen::VectorXd r = chain.samples.rowwise().mean();
  return from_real_coords(chain.cut, r);
}

FunctionalSummary posterior_functional(const PosteriorChain& chain,
                                       const SpectralField& psi) {
  if (chain.samples.cols() == 0)
    throw std::invalid_argument("posterior_functional: empty chain");
  if (!(psi.cut() == *chain.cut))
    throw std::invalid_argument("posterior_functional: psi lives on a different cut");
  Eigen::VectorXd p = to_real_coords(psi);

  FunctionalSummary out;
  out.samples = chain.samples.transpose() * p;
  out.mean = out.samples.mean();
  out.mcse = batch_mcse(out.samples);
  out.batches = static_cast<int>(
      std::floor(std::sqrt(static_cast<double>(out.samples.size()))));
  if (out.samples.size() < 100)
    out.warning = "chain too short for requested precision";
  return out;
}

CredibleBand credible_band(const std::vector<PosteriorChain>& chains,
                           const ReactionFunction& f, double t_min, double t_max,
                           int grid, double alpha, const SolverConfig& solver,
                           int max_draws) {
  if (chains.empty()) throw std::invalid_argument("credible_band: no chains");
  if (!(alpha >= 0.0 && alpha < 1.0))
    throw std::invalid_argument("credible_band: alpha outside [0, 1)");
  if (!(0.0 < t_min && t_min < t_max))
    throw std::invalid_argument("credible_band: need 0 < t_min < t_max");
  if (grid < 2) throw std::invalid_argument("credible_band: grid too small");

  const CutPtr& cut = chains.front().cut;
  long total = 0;
  for (const auto& c : chains) {
    if (!(*c.cut == *cut))
      throw std::invalid_argument("credible_band: chains on different cuts");
    total += c.samples.cols();
  }
  if (total < 10) throw std::invalid_argument("credible_band: too few draws for quantile");

  const int J = cut->size();
  Eigen::MatrixXd pool(J, total);
  long at = 0;
  for (const auto& c : chains) {
    pool.middleCols(at, c.samples.cols()) = c.samples;
    at += c.samples.cols();
  }

  CredibleBand band;
  band.alpha = alpha;
  band.t_min = t_min;
  band.t_max = t_max;
  band.grid = grid;
  band.center = solve_rd(from_real_coords(cut, pool.rowwise().mean()), f, t_max, solver);

  Eigen::MatrixXd G = grid_basis(*cut, grid);
  std::vector<int> window;
  for (int n = 0; n < static_cast<int>(band.center.times.size()); ++n)
    if (band.center.times[n] >= t_min - 1e-12) window.push_back(n);
  Eigen::MatrixXd Rc = trajectory_chart(band.center);
  Eigen::MatrixXd center_vals(G.rows(), window.size());
  for (std::size_t w = 0; w < window.size(); ++w)
    center_vals.col(static_cast<long>(w)) = G * Rc.col(window[w]);

  const int n_use = static_cast<int>(std::min<long>(max_draws, total));
  band.sups.reserve(static_cast<std::size_t>(n_use));
  for (int i = 0; i < n_use; ++i) {
    long idx = (static_cast<long>(i) * total) / n_use;
    Trajectory traj = solve_rd(from_real_coords(cut, pool.col(idx)), f, t_max, solver);
    Eigen::MatrixXd R = trajectory_chart(traj);
    double sup = 0.0;
    for (std::size_t w = 0; w < window.size(); ++w) {
      Eigen::VectorXd diff =
          G * R.col(window[w]) - center_vals.col(static_cast<long>(w));
      sup = std::max(sup, diff.cwiseAbs().maxCoeff());
    }
    band.sups.push_back(sup);
  }

  std::vector<double> sorted = band.sups;
  std::sort(sorted.begin(), sorted.end());
  int k = static_cast<int>(std::floor((1.0 - alpha) * n_use));
  band.radius = k == 0 ? 0.0 : sorted[static_cast<std::size_t>(k - 1)];
  return band;
}

double band_sup_distance(const CredibleBand& band, const Trajectory& path) {
  if (!(*path.cut == *band.center.cut))
    throw std::invalid_argument("band_sup_distance: path lives on a different cut");
  if (path.horizon() < band.t_max - 1e-12)
    throw std::invalid_argument("band_sup_distance: path ends before the band window");

  Eigen::MatrixXd G = grid_basis(*band.center.cut, band.grid);
  Eigen::MatrixXd Rc = trajectory_chart(band.center);
  double sup = 0.0;
  for (int n = 0; n < static_cast<int>(band.center.times.size()); ++n) {
    double t = band.center.times[n];
    if (t < band.t_min - 1e-12) continue;
    SpectralField ft(path.cut, interpolate_coeffs(path, t));
    Eigen::VectorXd diff = G * to_real_coords(ft) - G * Rc.col(n);
    sup = std::max(sup, diff.cwiseAbs().maxCoeff());
  }
  return sup;
}

}  // namespace bvm
