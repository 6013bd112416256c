#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bvm/bayes.hpp"
#include "bvm/report.hpp"

namespace bvm {

// exact W1 between 1-d empirical measures: mean |sorted a - sorted b|; unequal
// sizes are reduced to the smaller one by deterministic mid-quantile resampling
double w1_1d(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct ProjectionFamily {
  std::vector<SpectralField> psis;
  std::vector<std::string> labels;
  int size() const { return static_cast<int>(psis.size()); }
};

// first m zero-mean modes scaled to unit H^{kappa+2} norm
ProjectionFamily make_projection_family(const CutPtr& cut, int m, double kappa = 2.0);

// shared problem description for the experiment drivers; the horizon, forward
// step and quadrature all come from the info block
struct LabProblem {
  CutPtr cut;
  SpectralField theta0;
  ReactionFunction f;
  InfoConfig info;
  double picard_tol = 1e-10;

  SolverConfig solver() const {
    SolverConfig s;
    s.dt = info.solver_dt;
    s.picard_tol = picard_tol;
    return s;
  }
};

// L2 norm over [0,T] x torus (Lebesgue in time) of G(theta0+h) - G(theta0) - I h
double quadratic_remainder(const LabProblem& prob, const SpectralField& h);

// the drivers that need the information operator accept a prebuilt one (a
// cache hit from a previous run); when null it is assembled from the problem
ExperimentReport bvm_theta_experiment(const LabProblem& prob, const PriorSpec& prior,
                                      const std::vector<int>& N_grid,
                                      const ProjectionFamily& family, int replications,
                                      const PcnConfig& pcn, std::uint64_t seed,
                                      int limit_pool = 10000,
                                      const InfoOperator* shared_info = nullptr);

ExperimentReport bvm_path_experiment(const LabProblem& prob, const PriorSpec& prior,
                                     const std::vector<int>& N_grid, int replications,
                                     const PcnConfig& pcn, double t_min, int grid,
                                     int path_draws, std::uint64_t seed,
                                     const InfoOperator* shared_info = nullptr);

ExperimentReport clt_experiment(const LabProblem& prob, const SpectralField& psi, int N,
                                int replications, std::uint64_t seed,
                                int target_pool = 10000,
                                const InfoOperator* shared_info = nullptr);

ExperimentReport coverage_experiment(const LabProblem& prob, const PriorSpec& prior,
                                     int N, double alpha, int replications,
                                     const PcnConfig& pcn, double t_min, int grid,
                                     int max_draws, std::uint64_t seed);

ExperimentReport condition_probes(const LabProblem& prob, double ball_radius, int trials,
                                  double gamma_bar, std::uint64_t seed,
                                  double zeta = 1.0);

ExperimentReport contraction_experiment(const LabProblem& prob, const PriorSpec& prior,
                                        const std::vector<int>& N_grid,
                                        const std::vector<double>& xi_list,
                                        double gamma_bar, int replications,
                                        const PcnConfig& pcn, std::uint64_t seed);

}  // namespace bvm
