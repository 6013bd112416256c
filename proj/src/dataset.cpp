#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "bvm/bayes.hpp"

namespace bvm {

Dataset simulate_data(const SpectralField& theta0, const ReactionFunction& f, double T,
                      int N, std::uint64_t seed, double noise_sd,
                      const SolverConfig& solver) {
  return simulate_data(solve_rd(theta0, f, T, solver), N, seed, noise_sd);
}

Dataset simulate_data(const Trajectory& traj, int N, std::uint64_t seed,
                      double noise_sd) {
  if (N < 1) throw std::invalid_argument("simulate_data: need at least one observation");
  if (noise_sd < 0.0) throw std::invalid_argument("simulate_data: negative noise level");
  const double T = traj.horizon();
  const int d = traj.cut->dim();

  Dataset data;
  data.d = d;
  data.T = T;
  data.noise_sd = noise_sd;
  data.y.resize(N);
  data.t.resize(N);
  data.x.resize(N, d);

  Rng rng(substream_seed(seed, "dataset"));
  for (int i = 0; i < N; ++i) {
    data.t[i] = T * rng.uniform();
    std::array<double, 2> xi{0.0, 0.0};
    for (int a = 0; a < d; ++a) {
      xi[a] = rng.uniform();
      data.x(i, a) = xi[a];
    }
    double eps = noise_sd > 0.0 ? noise_sd * rng.normal() : 0.0;
    data.y[i] = evaluate(traj, data.t[i], xi) + eps;
  }
  return data;
}

void save_dataset_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_dataset_csv: cannot open " + path);
  out << std::setprecision(17);
  out << "# d=" << data.d << " T=" << data.T << " noise_sd=" << data.noise_sd << "\n";
  out << "Y,t,x0";
  if (data.d == 2) out << ",x1";
  out << "\n";
  for (int i = 0; i < data.size(); ++i) {
    out << data.y[i] << "," << data.t[i] << "," << data.x(i, 0);
    if (data.d == 2) out << "," << data.x(i, 1);
    out << "\n";
  }
  if (!out) throw std::runtime_error("save_dataset_csv: write failed for " + path);
}

Dataset load_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_dataset_csv: cannot open " + path);

  Dataset data;
  std::string line;
  std::vector<std::array<double, 4>> rows;
  bool header_seen = false;
  int cols = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string tok;
      while (meta >> tok) {
        auto eq = tok.find('=');
        if (eq == std::string::npos) continue;
        std::string key = tok.substr(0, eq);
        double val = std::stod(tok.substr(eq + 1));
        if (key == "d") data.d = static_cast<int>(val);
        if (key == "T") data.T = val;
        if (key == "noise_sd") data.noise_sd = val;
      }
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      cols = 3 + static_cast<int>(line.find("x1") != std::string::npos);
      continue;
    }
    std::array<double, 4> row{0.0, 0.0, 0.0, 0.0};
    std::istringstream ss(line);
    std::string cell;
    for (int c = 0; c < cols; ++c) {
      if (!std::getline(ss, cell, ','))
        throw std::runtime_error("load_dataset_csv: short row in " + path);
      row[static_cast<std::size_t>(c)] = std::stod(cell);
    }
    rows.push_back(row);
  }
  if (!header_seen || rows.empty())
    throw std::runtime_error("load_dataset_csv: no observations in " + path);

  data.d = cols - 2;
  const int N = static_cast<int>(rows.size());
  data.y.resize(N);
  data.t.resize(N);
  data.x.resize(N, data.d);
  double tmax = 0.0;
  for (int i = 0; i < N; ++i) {
    data.y[i] = rows[static_cast<std::size_t>(i)][0];
    data.t[i] = rows[static_cast<std::size_t>(i)][1];
    data.x(i, 0) = rows[static_cast<std::size_t>(i)][2];
    if (data.d == 2) data.x(i, 1) = rows[static_cast<std::size_t>(i)][3];
    tmax = std::max(tmax, data.t[i]);
  }
  if (data.T < tmax) data.T = tmax;
  return data;
}

}  // namespace bvm
