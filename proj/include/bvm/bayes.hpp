#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bvm/info_operator.hpp"
#include "bvm/rng.hpp"

namespace bvm {

// Gaussian prior N(0, rho_N^2 Lap^{-gamma}) on zero-mean fields with the
// sample-size-dependent shrinkage rho_N = 1/(sqrt(N) delta_N).
struct PriorSpec {
  double gamma = 2.0;
  int N = 1000;
  double rho_scale = 1.0;

  void validate(int d) const;               // gamma > 1 + d/2, N >= 1
  double delta(int d) const;                // N^{-gamma/(2 gamma + d)}
  double rho(int d) const;                  // rho_scale / (sqrt(N) delta)
};

// per-slot prior standard deviations in the real chart (mean slot zero)
Eigen::VectorXd prior_sd_vector(const PriorSpec& prior, const CutPtr& cut);
SpectralField sample_prior(const PriorSpec& prior, const CutPtr& cut, Rng& rng);

struct Dataset {
  int d = 1;
  double T = 0.5;
  double noise_sd = 1.0;
  Eigen::VectorXd y;
  Eigen::VectorXd t;
  Eigen::MatrixXd x;  // N rows, d columns

  int size() const { return static_cast<int>(y.size()); }
};

// uniform (t_i, x_i) on [0,T] x torus, Y_i = u_theta0(t_i, x_i) + noise
Dataset simulate_data(const SpectralField& theta0, const ReactionFunction& f, double T,
                      int N, std::uint64_t seed, double noise_sd = 1.0,
                      const SolverConfig& solver = {});
// same sampling against an already-solved trajectory
Dataset simulate_data(const Trajectory& traj, int N, std::uint64_t seed,
                      double noise_sd = 1.0);
void save_dataset_csv(const Dataset& data, const std::string& path);
Dataset load_dataset_csv(const std::string& path);

// log likelihood -1/2 sum (Y_i - u_theta(t_i, x_i))^2 with one forward solve
// per evaluation; the design (basis rows and time stencils) is precomputed
class LikelihoodEvaluator {
 public:
  LikelihoodEvaluator(Dataset data, ReactionFunction f, CutPtr cut,
                      SolverConfig solver = {});

  double operator()(const SpectralField& theta) const;
  // model predictions at the data design for an already-solved trajectory
  Eigen::VectorXd predict(const Trajectory& traj) const;
  Trajectory solve(const SpectralField& theta) const;

  const Dataset& data() const { return data_; }
  const CutPtr& cut_ptr() const { return cut_; }
  const SolverConfig& solver() const { return solver_; }

 private:
  Dataset data_;
  ReactionFunction f_;
  CutPtr cut_;
  SolverConfig solver_;
  Eigen::MatrixXd basis_;          // N x J chart basis at x_i
  std::vector<int> stencil_;      // first column of the interpolation stencil
  Eigen::MatrixXd weights_;        // N x 4 cubic weights (rows 2..3 zero if linear)
};

struct PcnConfig {
  int steps = 20000;   // kept phase, post burn-in
  int burnin = 5000;   // adaptation phase, discarded
  int thin = 1;
  double beta0 = 0.5;
  double target_accept = 0.23;
  std::uint64_t seed = 0;
};

struct PosteriorChain {
  CutPtr cut;
  Eigen::MatrixXd samples;   // J x kept, real chart coordinates
  Eigen::VectorXd loglik;    // per kept sample
  double beta = 0.0;         // frozen after adaptation
  double accept_rate = 0.0;  // post burn-in
  std::vector<std::string> warnings;
};

// preconditioned Crank-Nicolson: theta' = sqrt(1-beta^2) theta + beta xi with
// xi a prior draw; beta dual-averaged to the target acceptance during burn-in
PosteriorChain run_pcn(const LikelihoodEvaluator& loglik, const PriorSpec& prior,
                       const PcnConfig& cfg);

SpectralField posterior_mean(const PosteriorChain& chain);

// batch-means standard error of the mean of a correlated series
double batch_mcse(const Eigen::VectorXd& series);

// evaluation matrix of the real chart basis on a uniform grid x = p/grid
// (grid points in d=1, grid^2 in d=2), one row per point
Eigen::MatrixXd grid_basis(const FrequencyCut& cut, int grid);

struct FunctionalSummary {
  Eigen::VectorXd samples;  // <theta, psi> per kept draw
  double mean = 0.0;
  double mcse = 0.0;        // batch-means standard error
  int batches = 0;
  std::string warning;
};

FunctionalSummary posterior_functional(const PosteriorChain& chain,
                                       const SpectralField& psi);

// sup-norm band over the (t, x) grid: center is the forward path of the
// posterior mean, radius the floor((1-alpha) n)-th smallest sup deviation of
// the propagated draws (a level below 1/n gives an empty band).
struct CredibleBand {
  Trajectory center;
  double radius = 0.0;
  double alpha = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  int grid = 0;
  std::vector<double> sups;  // per used draw, for diagnostics
};

CredibleBand credible_band(const std::vector<PosteriorChain>& chains,
                           const ReactionFunction& f, double t_min, double t_max,
                           int grid, double alpha, const SolverConfig& solver = {},
                           int max_draws = 400);

// sup over the band's own (t, x) grid of |path - center|
double band_sup_distance(const CredibleBand& band, const Trajectory& path);

// one-step efficient estimator around a known reference point: coefficients
// <e_j, theta0> + (T/N) sum_i U_{fisher_inverse(e_j)}(t_i, x_i) eps_i for the
// first J chart slots, with eps_i the residuals at theta0 (diagnostic device
// only); the factor T converts the Lebesgue-gram inverse to the design law
SpectralField efficient_estimator(const Dataset& data, const SpectralField& theta0,
                                  const ReactionFunction& f, const InfoOperator& info,
                                  int J);

}  // namespace bvm
