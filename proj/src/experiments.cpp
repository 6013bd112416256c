#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "bvm/lab.hpp"

namespace bvm {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median_of(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// (mean, standard error of the mean)
std::pair<double, double> mean_se(const std::vector<double>& v) {
  if (v.empty()) return {std::numeric_limits<double>::quiet_NaN(), 0.0};
  double mu = 0.0;
  for (double x : v) mu += x;
  mu /= static_cast<double>(v.size());
  if (v.size() < 2) return {mu, 0.0};
  double ss = 0.0;
  for (double x : v) ss += (x - mu) * (x - mu);
  const double n = static_cast<double>(v.size());
  return {mu, std::sqrt(ss / (n - 1.0) / n)};
}

double sample_variance(const Eigen::VectorXd& v) {
  if (v.size() < 2) return 0.0;
  double mu = v.mean();
  return (v.array() - mu).square().sum() / static_cast<double>(v.size() - 1);
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

std::string cell_N(int N) { return "N=" + std::to_string(N); }

PriorSpec with_N(PriorSpec prior, int N) {
  prior.N = N;
  return prior;
}

PotentialPath problem_potential(const LabProblem& prob, const Trajectory& traj0) {
  if (prob.f.is_zero()) return constant_potential(SpectralField(prob.cut));
  return linearized_potential(traj0, prob.f, prob.info.potential_stride);
}

PosteriorChain run_chain(const LabProblem& prob, const PriorSpec& prior,
                         const Dataset& data, PcnConfig pcn, std::uint64_t chain_seed) {
  LikelihoodEvaluator loglik(data, prob.f, prob.cut, prob.solver());
  pcn.seed = chain_seed;
  return run_pcn(loglik, prior, pcn);
}

// ||a - b||^2 over [0,T] x torus, trapezoid in time; grids must agree
double l2x_sq(const Trajectory& a, const Trajectory& b) {
  const int n = static_cast<int>(a.times.size());
  if (n != static_cast<int>(b.times.size()) || std::abs(a.dt - b.dt) > 1e-12 * a.dt)
    throw std::invalid_argument("l2x_sq: trajectory grids differ");
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = a.dt * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    acc += w * (a.states.col(i) - b.states.col(i)).squaredNorm();
  }
  return acc;
}

// sup over grid columns with t >= t_min of the evaluated chart (difference)
double sup_window(const Eigen::MatrixXd& G, const Eigen::MatrixXd& Ra,
                  const Eigen::MatrixXd* Rb, const std::vector<double>& times,
                  double t_min) {
  double sup = 0.0;
  for (int i = 0; i < static_cast<int>(times.size()); ++i) {
    if (times[i] < t_min - 1e-12) continue;
    Eigen::VectorXd r = Rb ? Eigen::VectorXd(Ra.col(i) - Rb->col(i))
                           : Eigen::VectorXd(Ra.col(i));
    sup = std::max(sup, (G * r).cwiseAbs().maxCoeff());
  }
  return sup;
}

std::string problem_json(const LabProblem& prob) {
  std::ostringstream os;
  os << "\"problem\":{\"d\":" << prob.cut->dim() << ",\"K\":" << prob.cut->radius()
     << ",\"T\":" << prob.info.T << ",\"reaction\":\"" << prob.f.label
     << "\",\"solver_dt\":" << prob.info.solver_dt << ",\"flow_dt\":"
     << prob.info.flow_dt << ",\"quad_slices\":" << prob.info.quad_slices << "}";
  return os.str();
}

std::string prior_json(const PriorSpec& prior) {
  std::ostringstream os;
  os << "\"prior\":{\"gamma\":" << prior.gamma << ",\"rho_scale\":" << prior.rho_scale
     << "}";
  return os.str();
}

std::string pcn_json(const PcnConfig& pcn) {
  std::ostringstream os;
  os << "\"pcn\":{\"steps\":" << pcn.steps << ",\"burnin\":" << pcn.burnin
     << ",\"thin\":" << pcn.thin << ",\"beta0\":" << pcn.beta0 << "}";
  return os.str();
}

template <typename T>
std::string json_list(const std::vector<T>& v) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
  os << "]";
  return os.str();
}

void check_shared_info(const InfoOperator& shared, const LabProblem& prob,
                       const char* who) {
  if (!(*shared.cut == *prob.cut) || shared.config.T != prob.info.T)
    throw std::invalid_argument(std::string(who) + ": shared info does not match the problem");
}

const InfoOperator& pick_info(const InfoOperator* shared, InfoOperator& own,
                              const LabProblem& prob, const char* who) {
  if (!shared) {
    own = assemble_info(prob.theta0, prob.f, prob.cut, prob.info);
    return own;
  }
  check_shared_info(*shared, prob, who);
  return *shared;
}

MetricRow accept_row(const std::string& cell, const PosteriorChain& chain,
                     std::uint64_t cseed) {
  return {cell, "accept_rate", chain.accept_rate, 0.0, cseed, 0.0, true,
          "beta=" + fmt(chain.beta)};
}

}  // namespace

double quadratic_remainder(const LabProblem& prob, const SpectralField& h) {
  if (!(h.cut() == *prob.cut))
    throw std::invalid_argument("quadratic_remainder: h lives on a different cut");
  const double T = prob.info.T;
  SolverConfig solver = prob.solver();
  Trajectory base = solve_rd(prob.theta0, prob.f, T, solver);
  SpectralField shifted(prob.cut, prob.theta0.coeffs() + h.coeffs());
  Trajectory pert = solve_rd(shifted, prob.f, T, solver);

  PotentialPath V = problem_potential(prob, base);
  LinearSolveConfig flow;
  flow.dt = prob.info.flow_dt;
  Trajectory lin = solve_linear(h, V, nullptr, T, flow);

  const int n = static_cast<int>(base.times.size());
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double w = base.dt * ((i == 0 || i == n - 1) ? 0.5 : 1.0);
    Eigen::VectorXcd diff = pert.states.col(i) - base.states.col(i) -
                            interpolate_coeffs(lin, base.times[i]);
    acc += w * diff.squaredNorm();
  }
  return std::sqrt(acc);
}

ExperimentReport bvm_theta_experiment(const LabProblem& prob, const PriorSpec& prior,
                                      const std::vector<int>& N_grid,
                                      const ProjectionFamily& family, int replications,
                                      const PcnConfig& pcn, std::uint64_t seed,
                                      int limit_pool, const InfoOperator* shared_info) {
  if (N_grid.empty()) throw std::invalid_argument("bvm_theta_experiment: empty N grid");
  if (family.size() < 1)
    throw std::invalid_argument("bvm_theta_experiment: empty projection family");
  if (replications < 1)
    throw std::invalid_argument("bvm_theta_experiment: need replications >= 1");
  if (limit_pool < 10)
    throw std::invalid_argument("bvm_theta_experiment: limit pool too small");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "bvm_theta";
  rep.seed = seed;

  const double T = prob.info.T;
  const int J = static_cast<int>(prob.cut->size());

  InfoOperator own_info;
  const InfoOperator& info = pick_info(shared_info, own_info, prob, "bvm_theta_experiment");
  LimitGaussian lim = limit_covariance(info);
  Eigen::MatrixXd Z = sample_limit_coeffs(lim, limit_pool,
                                          substream_seed(seed, "limit"), std::sqrt(T));
  Trajectory traj0 = solve_rd(prob.theta0, prob.f, T, prob.solver());

  std::vector<Eigen::VectorXd> chart_psi(family.psis.size());
  std::vector<Eigen::VectorXd> target(family.psis.size());
  for (int k = 0; k < family.size(); ++k) {
    if (!(family.psis[k].cut() == *prob.cut))
      throw std::invalid_argument("bvm_theta_experiment: family on a different cut");
    chart_psi[k] = to_real_coords(family.psis[k]);
    target[k] = Z.transpose() * chart_psi[k].tail(J - 1);
  }

  std::vector<double> med_by_N, se_by_N;
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    const int N = N_grid[i];
    std::vector<double> rep_medians;
    for (int r = 0; r < replications; ++r) {
      auto t_rep = Clock::now();
      const std::uint64_t cell = i * 1000003ull + static_cast<std::uint64_t>(r);
      const std::uint64_t dseed = substream_seed(seed, "data", cell);
      const std::uint64_t cseed = substream_seed(seed, "chain", cell);
      std::string rcell = cell_N(N) + " rep=" + std::to_string(r);
      try {
        Dataset data = simulate_data(traj0, N, dseed, 1.0);
        PosteriorChain chain = run_chain(prob, with_N(prior, N), data, pcn, cseed);
        rep.rows.push_back(accept_row(rcell, chain, cseed));
        Eigen::VectorXd mean = chain.samples.rowwise().mean();
        std::string note = chain.warnings.empty() ? "" : chain.warnings.front();
        std::vector<double> ws;
        for (int k = 0; k < family.size(); ++k) {
          Eigen::VectorXd proj = chain.samples.transpose() * chart_psi[k];
          Eigen::VectorXd centered =
              std::sqrt(static_cast<double>(N)) *
              (proj.array() - mean.dot(chart_psi[k])).matrix();
          double w = w1_1d(centered, target[k]);
          ws.push_back(w);
          rep.rows.push_back({rcell + " psi=" + family.labels[k], "w1", w, 0.0, dseed,
                              0.0, true, note});
        }
        double med = median_of(ws);
        rep_medians.push_back(med);
        rep.rows.push_back(
            {rcell, "w1_median", med, 0.0, dseed, seconds_since(t_rep), true, note});
      } catch (const std::exception& e) {
        rep.rows.push_back({rcell, "w1_median",
                            std::numeric_limits<double>::quiet_NaN(), 0.0, dseed,
                            seconds_since(t_rep), false, e.what()});
      }
    }
    auto [mu, se] = mean_se(rep_medians);
    rep.rows.push_back(
        {cell_N(N), "w1_median_mean", mu, se, seed, 0.0, !rep_medians.empty(), ""});
    med_by_N.push_back(mu);
    se_by_N.push_back(se);
  }

  for (std::size_t i = 0; i + 1 < N_grid.size(); ++i) {
    std::string cell = cell_N(N_grid[i]) + "->" + std::to_string(N_grid[i + 1]);
    bool pass = med_by_N[i] - se_by_N[i] > med_by_N[i + 1] + se_by_N[i + 1];
    rep.rows.push_back({cell, "trend_decreasing", med_by_N[i] - med_by_N[i + 1],
                        se_by_N[i] + se_by_N[i + 1], seed, 0.0, pass, ""});
  }

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"bvm_theta\"," << problem_json(prob) << ","
      << prior_json(prior) << ",\"N_grid\":" << json_list(N_grid)
      << ",\"replications\":" << replications << "," << pcn_json(pcn)
      << ",\"family\":" << family.size() << ",\"limit_pool\":" << limit_pool << "}";
  rep.stamp(cfg.str());
  return rep;
}

ExperimentReport bvm_path_experiment(const LabProblem& prob, const PriorSpec& prior,
                                     const std::vector<int>& N_grid, int replications,
                                     const PcnConfig& pcn, double t_min, int grid,
                                     int path_draws, std::uint64_t seed,
                                     const InfoOperator* shared_info) {
  const double T = prob.info.T;
  if (N_grid.empty()) throw std::invalid_argument("bvm_path_experiment: empty N grid");
  if (replications < 1)
    throw std::invalid_argument("bvm_path_experiment: need replications >= 1");
  if (t_min <= 0.0 || t_min >= T)
    throw std::invalid_argument("bvm_path_experiment: t_min outside (0, T)");
  if (grid < 2) throw std::invalid_argument("bvm_path_experiment: grid too small");
  if (path_draws < 10)
    throw std::invalid_argument("bvm_path_experiment: need at least 10 path draws");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "bvm_path";
  rep.seed = seed;

  InfoOperator own_info;
  const InfoOperator& info = pick_info(shared_info, own_info, prob, "bvm_path_experiment");
  LimitGaussian lim = limit_covariance(info);
  Trajectory traj0 = solve_rd(prob.theta0, prob.f, T, prob.solver());
  PotentialPath V = problem_potential(prob, traj0);

  const int limit_draws = std::max(4 * path_draws, 400);
  std::vector<Trajectory> limit_paths =
      sample_limit_process(lim, V, T, prob.info.flow_dt, limit_draws,
                           substream_seed(seed, "limitpath"), std::sqrt(T));

  Eigen::MatrixXd G = grid_basis(*prob.cut, grid);
  const int points = static_cast<int>(G.rows());
  const int probes = 5;
  std::vector<double> t_probe(probes);
  for (int q = 0; q < probes; ++q)
    t_probe[q] = t_min + (T - t_min) * q / (probes - 1);

  // limit-side marginals and sup functional
  std::vector<Eigen::MatrixXd> lim_marg(probes);
  for (int q = 0; q < probes; ++q) lim_marg[q].resize(points, limit_draws);
  Eigen::VectorXd lim_sup(limit_draws);
  for (int l = 0; l < limit_draws; ++l) {
    const Trajectory& path = limit_paths[l];
    Eigen::MatrixXd R = trajectory_chart(path);
    for (int q = 0; q < probes; ++q) {
      SpectralField slice(prob.cut, interpolate_coeffs(path, t_probe[q]));
      lim_marg[q].col(l) = G * to_real_coords(slice);
    }
    lim_sup[l] = sup_window(G, R, nullptr, path.times, t_min);
  }
  for (int q = 0; q < probes; ++q) {
    double avg_var = 0.0;
    for (int p = 0; p < points; ++p)
      avg_var += sample_variance(lim_marg[q].row(p).transpose());
    rep.rows.push_back({"t=" + fmt(t_probe[q]), "limit_var_avg", avg_var / points, 0.0,
                        seed, 0.0, true, ""});
  }

  std::vector<double> sup_by_N, sup_se_by_N;
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    const int N = N_grid[i];
    std::vector<double> rep_marg_w1, rep_sup_w1;
    std::vector<std::vector<double>> rep_post_var(probes);
    for (int r = 0; r < replications; ++r) {
      auto t_rep = Clock::now();
      const std::uint64_t cell = i * 1000003ull + static_cast<std::uint64_t>(r);
      const std::uint64_t dseed = substream_seed(seed, "data", cell);
      const std::uint64_t cseed = substream_seed(seed, "chain", cell);
      std::string rcell = cell_N(N) + " rep=" + std::to_string(r);
      try {
        Dataset data = simulate_data(traj0, N, dseed, 1.0);
        PosteriorChain chain = run_chain(prob, with_N(prior, N), data, pcn, cseed);
        rep.rows.push_back(accept_row(rcell, chain, cseed));
        std::string note = chain.warnings.empty() ? "" : chain.warnings.front();

        Eigen::VectorXd mean = chain.samples.rowwise().mean();
        Trajectory center = solve_rd(from_real_coords(prob.cut, mean), prob.f, T,
                                     prob.solver());
        Eigen::MatrixXd Rc = trajectory_chart(center);
        std::vector<Eigen::VectorXd> center_slice(probes);
        for (int q = 0; q < probes; ++q) {
          SpectralField cs(prob.cut, interpolate_coeffs(center, t_probe[q]));
          center_slice[q] = to_real_coords(cs);
        }
        const double root_N = std::sqrt(static_cast<double>(N));

        const long kept = chain.samples.cols();
        const int n_use = static_cast<int>(std::min<long>(path_draws, kept));
        std::vector<Eigen::MatrixXd> post_marg(probes);
        for (int q = 0; q < probes; ++q) post_marg[q].resize(points, n_use);
        Eigen::VectorXd post_sup(n_use);
        for (int s = 0; s < n_use; ++s) {
          long idx = (static_cast<long>(s) * kept) / n_use;
          Trajectory draw = solve_rd(from_real_coords(prob.cut, chain.samples.col(idx)),
                                     prob.f, T, prob.solver());
          Eigen::MatrixXd Rd = trajectory_chart(draw);
          for (int q = 0; q < probes; ++q) {
            SpectralField ds(prob.cut, interpolate_coeffs(draw, t_probe[q]));
            post_marg[q].col(s) =
                root_N * (G * (to_real_coords(ds) - center_slice[q]));
          }
          post_sup[s] = root_N * sup_window(G, Rd, &Rc, draw.times, t_min);
        }

        std::vector<double> point_w1;
        for (int q = 0; q < probes; ++q) {
          for (int p = 0; p < points; ++p)
            point_w1.push_back(w1_1d(post_marg[q].row(p).transpose(),
                                     lim_marg[q].row(p).transpose()));
          double avg_var = 0.0;
          for (int p = 0; p < points; ++p)
            avg_var += sample_variance(post_marg[q].row(p).transpose());
          rep_post_var[q].push_back(avg_var / points);
        }
        double marg_med = median_of(point_w1);
        double sup_w = w1_1d(post_sup, lim_sup);
        rep_marg_w1.push_back(marg_med);
        rep_sup_w1.push_back(sup_w);
        rep.rows.push_back({rcell, "marginal_w1_median", marg_med, 0.0, dseed, 0.0,
                            true, note});
        rep.rows.push_back(
            {rcell, "sup_w1", sup_w, 0.0, dseed, seconds_since(t_rep), true, note});
      } catch (const std::exception& e) {
        rep.rows.push_back({rcell, "sup_w1", std::numeric_limits<double>::quiet_NaN(),
                            0.0, dseed, seconds_since(t_rep), false, e.what()});
      }
    }
    auto [marg_mu, marg_se] = mean_se(rep_marg_w1);
    auto [sup_mu, sup_se] = mean_se(rep_sup_w1);
    rep.rows.push_back({cell_N(N), "marginal_w1_mean", marg_mu, marg_se, seed, 0.0,
                        !rep_marg_w1.empty(), ""});
    rep.rows.push_back(
        {cell_N(N), "sup_w1_mean", sup_mu, sup_se, seed, 0.0, !rep_sup_w1.empty(), ""});
    for (int q = 0; q < probes; ++q) {
      auto [v_mu, v_se] = mean_se(rep_post_var[q]);
      rep.rows.push_back({cell_N(N) + " t=" + fmt(t_probe[q]), "post_var_avg", v_mu,
                          v_se, seed, 0.0, true, ""});
    }
    sup_by_N.push_back(sup_mu);
    sup_se_by_N.push_back(sup_se);
  }

  for (std::size_t i = 0; i + 1 < N_grid.size(); ++i) {
    std::string cell = cell_N(N_grid[i]) + "->" + std::to_string(N_grid[i + 1]);
    bool pass = sup_by_N[i] - sup_se_by_N[i] > sup_by_N[i + 1] + sup_se_by_N[i + 1];
    rep.rows.push_back({cell, "sup_trend_decreasing", sup_by_N[i] - sup_by_N[i + 1],
                        sup_se_by_N[i] + sup_se_by_N[i + 1], seed, 0.0, pass, ""});
  }

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"bvm_path\"," << problem_json(prob) << ","
      << prior_json(prior) << ",\"N_grid\":" << json_list(N_grid)
      << ",\"replications\":" << replications << "," << pcn_json(pcn)
      << ",\"t_min\":" << t_min << ",\"grid\":" << grid
      << ",\"path_draws\":" << path_draws << "}";
  rep.stamp(cfg.str());
  return rep;
}

ExperimentReport clt_experiment(const LabProblem& prob, const SpectralField& psi, int N,
                                int replications, std::uint64_t seed, int target_pool,
                                const InfoOperator* shared_info) {
  if (!(psi.cut() == *prob.cut))
    throw std::invalid_argument("clt_experiment: psi lives on a different cut");
  if (N < 1) throw std::invalid_argument("clt_experiment: need N >= 1");
  if (replications < 200)
    throw std::invalid_argument("clt_experiment: need at least 200 replications");
  if (target_pool < 100)
    throw std::invalid_argument("clt_experiment: target pool too small");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "clt";
  rep.seed = seed;

  const double T = prob.info.T;
  const int J = static_cast<int>(prob.cut->size());
  Trajectory traj0 = solve_rd(prob.theta0, prob.f, T, prob.solver());
  PotentialPath V = problem_potential(prob, traj0);
  InfoOperator own_info;
  if (shared_info) check_shared_info(*shared_info, prob, "clt_experiment");
  else own_info = info_from_potential(V, prob.cut, prob.info);
  const InfoOperator& info = shared_info ? *shared_info : own_info;

  SpectralField psi_bar = fisher_inverse(info, psi);
  LinearSolveConfig flow;
  flow.dt = prob.info.flow_dt;
  Trajectory U = solve_linear(psi_bar, V, nullptr, T, flow);

  Eigen::VectorXd bz = to_real_coords(psi_bar).tail(J - 1);
  const double target_var = T * bz.dot(info.gram * bz);
  const double target_sd = std::sqrt(target_var);
  rep.rows.push_back({"", "target_var", target_var, 0.0, seed, 0.0, true, ""});

  Eigen::VectorXd vals(replications);
  const double root_N = std::sqrt(static_cast<double>(N));
  for (int r = 0; r < replications; ++r) {
    Dataset data = simulate_data(traj0, N, substream_seed(seed, "data", r), 1.0);
    double acc = 0.0;
    for (int i = 0; i < N; ++i) {
      std::array<double, 2> xi{data.x(i, 0), data.d == 2 ? data.x(i, 1) : 0.0};
      double eps = data.y[i] - evaluate(traj0, data.t[i], xi);
      acc += evaluate(U, data.t[i], xi) * eps;
    }
    vals[r] = root_N * T * acc / N;
  }

  auto t_rep_done = Clock::now();
  const double mu = vals.mean();
  const double se = std::sqrt(sample_variance(vals) / replications);
  rep.rows.push_back({"", "mean_centered", mu, se, seed,
                      seconds_since(t_start), std::abs(mu) <= 4.0 * se, ""});

  const double ratio = sample_variance(vals) / target_var;
  const double ratio_err = ratio * std::sqrt(2.0 / (replications - 1));
  rep.rows.push_back({"", "variance_ratio", ratio, ratio_err, seed, 0.0,
                      ratio >= 0.85 && ratio <= 1.15, ""});

  Rng pool_rng(substream_seed(seed, "target"));
  Eigen::VectorXd pool(target_pool);
  for (int i = 0; i < target_pool; ++i) pool[i] = target_sd * pool_rng.normal();
  const double w = w1_1d(vals, pool);

  // resolution of the W1 statistic at this replication count, calibrated by
  // resampling the target law itself
  const int calib_rounds = 50;
  Rng calib_rng(substream_seed(seed, "calib"));
  std::vector<double> calib(calib_rounds);
  Eigen::VectorXd fresh(replications);
  for (int c = 0; c < calib_rounds; ++c) {
    for (int r = 0; r < replications; ++r) fresh[r] = target_sd * calib_rng.normal();
    calib[c] = w1_1d(fresh, pool);
  }
  auto [res_mu, res_se] = mean_se(calib);
  rep.rows.push_back({"", "w1", w, res_mu, seed, seconds_since(t_rep_done), true, ""});
  rep.rows.push_back({"", "w1_resolution", res_mu, res_se, seed, 0.0, true, ""});
  rep.rows.push_back({"", "w1_within_band", w / res_mu, 0.0, seed, 0.0,
                      w <= 4.0 * res_mu, ""});

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"clt\"," << problem_json(prob) << ",\"N\":" << N
      << ",\"replications\":" << replications << ",\"target_pool\":" << target_pool
      << "}";
  rep.stamp(cfg.str());
  return rep;
}

ExperimentReport coverage_experiment(const LabProblem& prob, const PriorSpec& prior,
                                     int N, double alpha, int replications,
                                     const PcnConfig& pcn, double t_min, int grid,
                                     int max_draws, std::uint64_t seed) {
  if (replications < 1)
    throw std::invalid_argument("coverage_experiment: need replications >= 1");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "coverage";
  rep.seed = seed;

  const double T = prob.info.T;
  Trajectory truth = solve_rd(prob.theta0, prob.f, T, prob.solver());

  std::vector<double> covered, radii;
  for (int r = 0; r < replications; ++r) {
    auto t_rep = Clock::now();
    const std::uint64_t dseed = substream_seed(seed, "data", r);
    const std::uint64_t cseed = substream_seed(seed, "chain", r);
    std::string rcell = "rep=" + std::to_string(r);
    try {
      Dataset data = simulate_data(truth, N, dseed, 1.0);
      PosteriorChain chain = run_chain(prob, with_N(prior, N), data, pcn, cseed);
      rep.rows.push_back(accept_row(rcell, chain, cseed));
      CredibleBand band = credible_band({chain}, prob.f, t_min, T, grid, alpha,
                                        prob.solver(), max_draws);
      double dist = band_sup_distance(band, truth);
      bool in = dist <= band.radius + 1e-12;
      covered.push_back(in ? 1.0 : 0.0);
      radii.push_back(band.radius);
      std::string note = "radius=" + fmt(band.radius) + " dist=" + fmt(dist);
      if (!chain.warnings.empty()) note += " " + chain.warnings.front();
      rep.rows.push_back({rcell, "covered", covered.back(), 0.0, dseed,
                          seconds_since(t_rep), true, note});
    } catch (const std::exception& e) {
      rep.rows.push_back({rcell, "covered", std::numeric_limits<double>::quiet_NaN(),
                          0.0, dseed, seconds_since(t_rep), false, e.what()});
    }
  }

  const double R = static_cast<double>(covered.size());
  double p = 0.0;
  for (double c : covered) p += c;
  p = covered.empty() ? std::numeric_limits<double>::quiet_NaN() : p / R;
  double p_se = covered.empty() ? 0.0 : std::sqrt(std::max(p * (1.0 - p), 0.0) / R);
  bool pass = !covered.empty() && p >= 1.0 - alpha - 0.10 && p <= 1.0;
  rep.rows.push_back({"", "coverage", p, p_se, seed, 0.0, pass, ""});
  auto [rad_mu, rad_se] = mean_se(radii);
  rep.rows.push_back({"", "radius_mean", rad_mu, rad_se, seed, 0.0, true, ""});

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"coverage\"," << problem_json(prob) << ","
      << prior_json(prior) << ",\"N\":" << N << ",\"alpha\":" << alpha
      << ",\"replications\":" << replications << "," << pcn_json(pcn)
      << ",\"t_min\":" << t_min << ",\"grid\":" << grid
      << ",\"max_draws\":" << max_draws << "}";
  rep.stamp(cfg.str());
  return rep;
}

ExperimentReport condition_probes(const LabProblem& prob, double ball_radius, int trials,
                                  double gamma_bar, std::uint64_t seed, double zeta) {
  if (trials < 2) throw std::invalid_argument("condition_probes: need trials >= 2");
  if (ball_radius <= 0.0)
    throw std::invalid_argument("condition_probes: ball radius must be positive");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "probes";
  rep.seed = seed;

  const double T = prob.info.T;
  const int d = prob.cut->dim();
  const int J = static_cast<int>(prob.cut->size());
  SolverConfig solver = prob.solver();

  // trial directions from the H^{gamma_bar} ball around theta0
  Rng rng(substream_seed(seed, "ball"));
  std::vector<SpectralField> hs;
  for (int i = 0; i < trials; ++i) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(J);
    for (int j = 1; j < J; ++j)
      r[j] = rng.normal() *
             std::pow(1.0 + prob.cut->eigenvalue(j), -(gamma_bar + 0.5 * d + 0.1) / 2.0);
    SpectralField h = from_real_coords(prob.cut, r);
    double norm = sobolev_norm(h, {gamma_bar, false});
    double target = ball_radius * rng.uniform();
    h = SpectralField(prob.cut, h.coeffs() * (target / norm));
    hs.push_back(h);
  }

  Trajectory base = solve_rd(prob.theta0, prob.f, T, solver);
  std::vector<Trajectory> trajs;
  for (const SpectralField& h : hs)
    trajs.push_back(solve_rd(SpectralField(prob.cut, prob.theta0.coeffs() + h.coeffs()),
                             prob.f, T, solver));

  Eigen::MatrixXd G = grid_basis(*prob.cut, 64);
  Eigen::MatrixXd Rbase = trajectory_chart(base);
  std::vector<Eigen::MatrixXd> Rt;
  for (const Trajectory& t : trajs) Rt.push_back(trajectory_chart(t));

  // A: uniform bound of solutions over the ball
  {
    auto t0 = Clock::now();
    double sup = sup_window(G, Rbase, nullptr, base.times, 0.0);
    for (std::size_t i = 0; i < trajs.size(); ++i)
      sup = std::max(sup, sup_window(G, Rt[i], nullptr, trajs[i].times, 0.0));
    rep.rows.push_back({"", "A_sup_norm", sup, 0.0, seed, seconds_since(t0),
                        std::isfinite(sup), ""});
  }

  // B: Lipschitz ratio in L2([0,T] x torus) over trial pairs
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      double num = std::sqrt(l2x_sq(trajs[i], base));
      double den = hs[i].l2_norm();
      if (den > 0.0) worst = std::max(worst, num / den);
      for (std::size_t j = i + 1; j < trajs.size() && j < i + 3; ++j) {
        double nn = std::sqrt(l2x_sq(trajs[i], trajs[j]));
        double dd = (hs[i].coeffs() - hs[j].coeffs()).norm();
        if (dd > 0.0) worst = std::max(worst, nn / dd);
      }
    }
    rep.rows.push_back({"", "B_lipschitz", worst, 0.0, seed, seconds_since(t0),
                        std::isfinite(worst), ""});
  }

  // C: quadratic remainder and its halving ratio at ||h||_{L2} = 0.1
  {
    const int c_trials = std::min<int>(trials, 5);
    for (int i = 0; i < c_trials; ++i) {
      auto t0 = Clock::now();
      SpectralField h(prob.cut, hs[i].coeffs() * (0.1 / hs[i].l2_norm()));
      SpectralField half(prob.cut, h.coeffs() * 0.5);
      double r1 = quadratic_remainder(prob, h);
      double r2 = quadratic_remainder(prob, half);
      std::string cell = "h=" + std::to_string(i);
      rep.rows.push_back({cell, "C_remainder_ratio", r1 / 0.01, 0.0, seed, 0.0,
                          std::isfinite(r1), ""});
      if (r1 <= 1e-9) {
        rep.rows.push_back({cell, "C_halving", 0.0, 0.0, seed, seconds_since(t0), true,
                            "remainder at solver floor"});
      } else {
        double ratio = r2 / r1;
        rep.rows.push_back({cell, "C_halving", ratio, 0.0, seed, seconds_since(t0),
                            ratio >= 0.15 && ratio <= 0.35, ""});
      }
    }
  }

  // D: sup norm of the difference against the H^zeta distance
  {
    auto t0 = Clock::now();
    double worst = 0.0;
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      double num = sup_window(G, Rt[i], &Rbase, trajs[i].times, 0.0);
      double den = sobolev_norm(hs[i], {zeta, false});
      if (den > 0.0) worst = std::max(worst, num / den);
    }
    rep.rows.push_back({"", "D_sup_ratio", worst, 0.0, seed, seconds_since(t0),
                        std::isfinite(worst), ""});
  }

  // E: stability lower bound against the H^{-1} distance
  {
    auto t0 = Clock::now();
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < trajs.size(); ++i) {
      double num = l2x_sq(trajs[i], base);
      double den = sobolev_norm(hs[i], {-1.0, false});
      if (den > 0.0) best = std::min(best, num / (den * den));
    }
    rep.rows.push_back({"", "E_stability_min", best, 0.0, seed, seconds_since(t0),
                        std::isfinite(best) && best > 0.0, ""});
  }

  // F: condition number of scriptI under a doubling of the cut
  {
    auto t0 = Clock::now();
    InfoOperator info = assemble_info(prob.theta0, prob.f, prob.cut, prob.info);
    CutPtr big = make_cut(d, 2 * prob.cut->radius());
    Eigen::VectorXcd c = Eigen::VectorXcd::Zero(big->size());
    for (int j = 0; j < J; ++j)
      c[big->index_of(prob.cut->wavevector(j))] = prob.theta0.coeff(j);
    InfoOperator info2 = assemble_info(SpectralField(big, c), prob.f, big, prob.info);
    double ratio = info2.condition / info.condition;
    rep.rows.push_back({"", "F_condition_K", info.condition, 0.0, seed, 0.0, true, ""});
    rep.rows.push_back(
        {"", "F_condition_2K", info2.condition, 0.0, seed, 0.0, true, ""});
    rep.rows.push_back({"", "F_condition_ratio", ratio, 0.0, seed, seconds_since(t0),
                        ratio >= 0.5 && ratio <= 2.0, ""});
  }

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"probes\"," << problem_json(prob)
      << ",\"ball_radius\":" << ball_radius << ",\"trials\":" << trials
      << ",\"gamma_bar\":" << gamma_bar << ",\"zeta\":" << zeta << "}";
  rep.stamp(cfg.str());
  return rep;
}

ExperimentReport contraction_experiment(const LabProblem& prob, const PriorSpec& prior,
                                        const std::vector<int>& N_grid,
                                        const std::vector<double>& xi_list,
                                        double gamma_bar, int replications,
                                        const PcnConfig& pcn, std::uint64_t seed) {
  if (N_grid.empty())
    throw std::invalid_argument("contraction_experiment: empty N grid");
  if (xi_list.empty())
    throw std::invalid_argument("contraction_experiment: empty xi list");
  if (replications < 1)
    throw std::invalid_argument("contraction_experiment: need replications >= 1");
  auto t_start = Clock::now();

  ExperimentReport rep;
  rep.name = "contraction";
  rep.seed = seed;

  const double T = prob.info.T;
  const int d = prob.cut->dim();
  Trajectory traj0 = solve_rd(prob.theta0, prob.f, T, prob.solver());

  const std::size_t nx = xi_list.size();
  std::vector<std::vector<double>> err(nx), se(nx), rate(nx);
  for (std::size_t i = 0; i < N_grid.size(); ++i) {
    const int N = N_grid[i];
    PriorSpec pr = with_N(prior, N);
    const double delta = pr.delta(d);
    std::vector<std::vector<double>> rep_err(nx);
    for (int r = 0; r < replications; ++r) {
      auto t_rep = Clock::now();
      const std::uint64_t cell = i * 1000003ull + static_cast<std::uint64_t>(r);
      const std::uint64_t dseed = substream_seed(seed, "data", cell);
      const std::uint64_t cseed = substream_seed(seed, "chain", cell);
      std::string rcell = cell_N(N) + " rep=" + std::to_string(r);
      try {
        Dataset data = simulate_data(traj0, N, dseed, 1.0);
        PosteriorChain chain = run_chain(prob, pr, data, pcn, cseed);
        rep.rows.push_back(accept_row(rcell, chain, cseed));
        std::string note = chain.warnings.empty() ? "" : chain.warnings.front();
        const long kept = chain.samples.cols();
        const int n_use = static_cast<int>(std::min<long>(200, kept));
        for (std::size_t k = 0; k < nx; ++k) {
          std::vector<double> dist;
          for (int s = 0; s < n_use; ++s) {
            long idx = (static_cast<long>(s) * kept) / n_use;
            SpectralField draw = from_real_coords(prob.cut, chain.samples.col(idx));
            SpectralField diff(prob.cut, draw.coeffs() - prob.theta0.coeffs());
            dist.push_back(sobolev_norm(diff, {xi_list[k], false}));
          }
          double med = median_of(dist);
          rep_err[k].push_back(med);
          rep.rows.push_back({rcell + " xi=" + fmt(xi_list[k]), "posterior_err", med,
                              0.0, dseed, k + 1 == nx ? seconds_since(t_rep) : 0.0,
                              true, note});
        }
      } catch (const std::exception& e) {
        rep.rows.push_back({rcell, "posterior_err",
                            std::numeric_limits<double>::quiet_NaN(), 0.0, dseed,
                            seconds_since(t_rep), false, e.what()});
      }
    }
    for (std::size_t k = 0; k < nx; ++k) {
      auto [mu, s] = mean_se(rep_err[k]);
      double target = std::pow(delta, (gamma_bar - xi_list[k]) / (gamma_bar + 1.0));
      std::string cell = cell_N(N) + " xi=" + fmt(xi_list[k]);
      rep.rows.push_back(
          {cell, "posterior_err_mean", mu, s, seed, 0.0, !rep_err[k].empty(), ""});
      rep.rows.push_back({cell, "rate_target", target, 0.0, seed, 0.0, true, ""});
      err[k].push_back(mu);
      se[k].push_back(s);
      rate[k].push_back(target);
    }
  }

  // log-log fit of the measured error against the rate target
  for (std::size_t k = 0; k < nx; ++k) {
    double lo = *std::min_element(rate[k].begin(), rate[k].end());
    double hi = *std::max_element(rate[k].begin(), rate[k].end());
    std::string cell = "xi=" + fmt(xi_list[k]);
    if (rate[k].size() < 2 || hi / lo < 1.0 + 1e-9) {
      double worst = *std::max_element(err[k].begin(), err[k].end());
      rep.rows.push_back({cell, "err_bounded", worst, 0.0, seed, 0.0,
                          std::isfinite(worst), "rate target constant"});
      continue;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < rate[k].size(); ++i) {
      if (!std::isfinite(err[k][i]) || err[k][i] <= 0.0) continue;
      double x = std::log(rate[k][i]);
      double y = std::log(err[k][i]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
      ++n;
    }
    if (n < 2) {
      rep.rows.push_back({cell, "rate_slope", std::numeric_limits<double>::quiet_NaN(),
                          0.0, seed, 0.0, false, "too few finite cells"});
      continue;
    }
    double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    double c_fit = std::exp((sy - slope * sx) / n);
    rep.rows.push_back({cell, "rate_slope", slope, 0.0, seed, 0.0,
                        std::isfinite(slope), ""});
    rep.rows.push_back({cell, "rate_prefactor", c_fit, 0.0, seed, 0.0,
                        std::isfinite(c_fit), ""});
  }

  rep.total_runtime_s = seconds_since(t_start);
  std::ostringstream cfg;
  cfg << "{\"experiment\":\"contraction\"," << problem_json(prob) << ","
      << prior_json(prior) << ",\"N_grid\":" << json_list(N_grid)
      << ",\"xi_list\":" << json_list(xi_list) << ",\"gamma_bar\":" << gamma_bar
      << ",\"replications\":" << replications << "," << pcn_json(pcn) << "}";
  rep.stamp(cfg.str());
  return rep;
}

}  // namespace bvm
