#include "bvm/info_operator.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bvm/rng.hpp"
#include "json.hpp"

namespace bvm {

namespace {

constexpr double kRcondFloor = 1e-14;

void require_zero_mean(const SpectralField& g, const char* who) {
  if (!g.is_real()) throw std::invalid_argument(std::string(who) + ": field must be real");
  double scale = std::max(1.0, g.l2_norm());
  if (std::abs(g.coeff(0)) > 1e-12 * scale)
    throw std::invalid_argument(std::string(who) + ": field must have zero mean");
}

Eigen::VectorXd zero_mean_eigenvalues(const CutPtr& cut) {
  const int J = static_cast<int>(cut->size());
  Eigen::VectorXd lam(J - 1);
  for (int j = 1; j < J; ++j) lam[j - 1] = cut->eigenvalue(j);
  return lam;
}

void finalize_from_gram(InfoOperator& info) {
  Eigen::VectorXd lam = zero_mean_eigenvalues(info.cut);
  info.scriptI = (-lam).asDiagonal() * info.gram;
  info.lu.compute(info.scriptI);
  double rc = info.lu.rcond();
  info.condition = rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
}

double dyadic_block_ratio(const Eigen::VectorXd& increments) {
  const int m = static_cast<int>(increments.size());
  const int half = m / 2;
  const int quarter = m / 4;
  double recent = increments.segment(half, m - half).sum();
  double earlier = increments.segment(quarter, half - quarter).sum();
  if (earlier <= 0.0) return std::numeric_limits<double>::infinity();
  return recent / earlier;
}

}  // namespace

InfoOperator info_from_potential(const PotentialPath& V, const CutPtr& cut,
                                 const InfoConfig& cfg) {
  if (!(*V.cut == *cut))
    throw std::invalid_argument("info_from_potential: potential lives on a different cut");
  if (!(cfg.T > 0.0)) throw std::invalid_argument("info_from_potential: T must be positive");

  TimeQuadrature quad = cfg.graded ? graded_quadrature(cfg.T, cfg.quad_slices)
                                   : uniform_quadrature(cfg.T, cfg.quad_slices);

  InfoOperator info;
  info.cut = cut;
  info.config = cfg;
  info.gram = flow_gram(V, cut, quad, cfg.flow_dt);
  finalize_from_gram(info);
  return info;
}

std::string info_to_json(const InfoOperator& info) {
  nlohmann::json j;
  j["d"] = info.cut->dim();
  j["K"] = info.cut->radius();
  j["config"] = {{"T", info.config.T},
                 {"solver_dt", info.config.solver_dt},
                 {"flow_dt", info.config.flow_dt},
                 {"quad_slices", info.config.quad_slices},
                 {"graded", info.config.graded},
                 {"potential_stride", info.config.potential_stride}};
  j["condition"] = info.condition;
  nlohmann::json g = nlohmann::json::array();
  for (int r = 0; r < info.gram.rows(); ++r)
    for (int c = 0; c < info.gram.cols(); ++c) g.push_back(info.gram(r, c));
  j["gram"] = std::move(g);
  return j.dump() + "\n";
}

InfoOperator info_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  InfoOperator info;
  info.cut = make_cut(j.at("d").get<int>(), j.at("K").get<int>());
  const auto& c = j.at("config");
  info.config.T = c.at("T").get<double>();
  info.config.solver_dt = c.at("solver_dt").get<double>();
  info.config.flow_dt = c.at("flow_dt").get<double>();
  info.config.quad_slices = c.at("quad_slices").get<int>();
  info.config.graded = c.at("graded").get<bool>();
  info.config.potential_stride = c.at("potential_stride").get<int>();
  const int m = static_cast<int>(info.cut->size()) - 1;
  const auto& g = j.at("gram");
  if (static_cast<int>(g.size()) != m * m)
    throw std::invalid_argument("info_from_json: gram size does not match the cut");
  info.gram.resize(m, m);
  int k = 0;
  for (int r = 0; r < m; ++r)
    for (int col = 0; col < m; ++col) info.gram(r, col) = g[k++].get<double>();
  finalize_from_gram(info);
  return info;
}

InfoOperator assemble_info(const SpectralField& theta0, const ReactionFunction& f,
                           const CutPtr& cut, const InfoConfig& cfg) {
  if (!(theta0.cut() == *cut))
    throw std::invalid_argument("assemble_info: theta0 lives on a different cut");
  require_zero_mean(theta0, "assemble_info");

  if (f.is_zero()) {
    Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(static_cast<int>(cut->size()));
    return info_from_potential(constant_potential(SpectralField(cut, zero)), cut, cfg);
  }

  SolverConfig forward;
  forward.dt = cfg.solver_dt;
  Trajectory traj = solve_rd(theta0, f, cfg.T, forward);
  PotentialPath V = linearized_potential(traj, f, cfg.potential_stride);
  return info_from_potential(V, cut, cfg);
}

SpectralField fisher_inverse(const InfoOperator& info, const SpectralField& psi) {
  if (!(psi.cut() == *info.cut))
    throw std::invalid_argument("fisher_inverse: psi lives on a different cut");
  require_zero_mean(psi, "fisher_inverse");
  if (info.lu.rcond() < kRcondFloor) {
    std::ostringstream msg;
    msg << "fisher_inverse: scriptI numerically singular, condition estimate "
        << info.condition;
    throw std::runtime_error(msg.str());
  }

  const int J = static_cast<int>(info.cut->size());
  Eigen::VectorXd r = to_real_coords(psi);
  Eigen::VectorXd lam = zero_mean_eigenvalues(info.cut);
  Eigen::VectorXd rhs = (-lam.array() * r.tail(J - 1).array()).matrix();
  Eigen::VectorXd sol = info.lu.solve(rhs);

  Eigen::VectorXd full = Eigen::VectorXd::Zero(J);
  full.tail(J - 1) = sol;
  return from_real_coords(info.cut, full);
}

LimitGaussian limit_covariance(const InfoOperator& info) {
  if (info.lu.rcond() < kRcondFloor) {
    std::ostringstream msg;
    msg << "limit_covariance: scriptI numerically singular, condition estimate "
        << info.condition;
    throw std::runtime_error(msg.str());
  }
  const int m = static_cast<int>(info.gram.rows());
  Eigen::VectorXd lam = zero_mean_eigenvalues(info.cut);

  // columns of B are the influence functions of the coefficient functionals
  Eigen::MatrixXd B = info.lu.solve(Eigen::MatrixXd((-lam).asDiagonal()));
  Eigen::MatrixXd C = B.transpose() * info.gram * B;
  C = 0.5 * (C + C.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("limit_covariance: eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  double norm = std::max(ev.cwiseAbs().maxCoeff(), 1e-300);

  LimitGaussian lim;
  lim.cut = info.cut;
  lim.cov = C;
  double clipped = 0.0;
  Eigen::VectorXd pos = ev;
  for (int i = 0; i < m; ++i) {
    if (ev[i] < -1e-12 * norm) {
      std::ostringstream msg;
      msg << "limit_covariance: covariance not PSD, eigenvalue " << ev[i]
          << " against scale " << norm;
      throw std::runtime_error(msg.str());
    }
    if (ev[i] < 0.0) {
      clipped += -ev[i];
      pos[i] = 0.0;
    }
  }
  lim.clip_mass = clipped;
  lim.factor = es.eigenvectors() * pos.cwiseSqrt().asDiagonal();

  // smallest order on a coarse grid whose weighted diagonal tail looks summable
  lim.sobolev_order_check = std::numeric_limits<double>::infinity();
  for (double a = 0.0; a <= 4.0 + 1e-9; a += 0.25) {
    Eigen::VectorXd inc =
        (lam.array().pow(-a) * C.diagonal().array()).matrix();
    if (dyadic_block_ratio(inc) < 0.75) {
      lim.sobolev_order_check = a;
      break;
    }
  }
  return lim;
}

Eigen::MatrixXd sample_limit_coeffs(const LimitGaussian& lim, int n, std::uint64_t seed,
                                    double scale) {
  if (n <= 0) throw std::invalid_argument("sample_limit_coeffs: n must be positive");
  const int m = static_cast<int>(lim.factor.rows());
  Eigen::MatrixXd draws(m, n);
  for (int i = 0; i < n; ++i) {
    Rng rng(substream_seed(seed, "limitdraw", static_cast<std::uint64_t>(i)));
    Eigen::VectorXd g(m);
    for (int j = 0; j < m; ++j) g[j] = rng.normal();
    draws.col(i) = scale * (lim.factor * g);
  }
  return draws;
}

std::vector<Trajectory> sample_limit_process(const LimitGaussian& lim,
                                             const PotentialPath& V, double T, double dt,
                                             int n, std::uint64_t seed, double scale) {
  if (!(*V.cut == *lim.cut))
    throw std::invalid_argument("sample_limit_process: potential lives on a different cut");
  Eigen::MatrixXd draws = sample_limit_coeffs(lim, n, seed, scale);
  const int J = static_cast<int>(lim.cut->size());

  PropagatorCache cache(V, lim.cut);
  LinearSolveConfig cfg;
  cfg.dt = dt;
  std::vector<Trajectory> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(J);
    full.tail(J - 1) = draws.col(i);
    out.push_back(solve_linear(from_real_coords(lim.cut, full), V, nullptr, T, cfg, &cache));
  }
  return out;
}

}  // namespace bvm
