#include <algorithm>
#include <stdexcept>

#include "bvm/lab.hpp"

namespace bvm {

namespace {

std::vector<double> sorted_copy(const Eigen::VectorXd& v) {
  std::vector<double> out(v.data(), v.data() + v.size());
  std::sort(out.begin(), out.end());
  return out;
}

// mid-quantile subsample of an already sorted vector down to n entries
std::vector<double> quantile_subsample(const std::vector<double>& sorted, std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t idx = ((2 * i + 1) * sorted.size()) / (2 * n);
    out[i] = sorted[std::min(idx, sorted.size() - 1)];
  }
  return out;
}

}  // namespace

double w1_1d(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() == 0 || b.size() == 0)
    throw std::invalid_argument("w1_1d: empty sample vector");
  std::vector<double> sa = sorted_copy(a);
  std::vector<double> sb = sorted_copy(b);
  if (sa.size() > sb.size()) sa = quantile_subsample(sa, sb.size());
  if (sb.size() > sa.size()) sb = quantile_subsample(sb, sa.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) acc += std::abs(sa[i] - sb[i]);
  return acc / static_cast<double>(sa.size());
}

ProjectionFamily make_projection_family(const CutPtr& cut, int m, double kappa) {
  if (m < 1 || m > cut->size() - 1)
    throw std::invalid_argument("make_projection_family: m outside [1, J-1]");
  ProjectionFamily fam;
  for (int j = 1; j <= m; ++j) {
    Eigen::VectorXd r = Eigen::VectorXd::Zero(cut->size());
    r[j] = 1.0;
    SpectralField e = from_real_coords(cut, r);
    double scale = sobolev_norm(e, {kappa + 2.0, false});
    r[j] = 1.0 / scale;
    fam.psis.push_back(from_real_coords(cut, r));
    fam.labels.push_back("slot" + std::to_string(j));
  }
  return fam;
}

}  // namespace bvm
