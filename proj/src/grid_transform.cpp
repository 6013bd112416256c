#include "bvm/grid_transform.hpp"

#include <fftw3.h>

#include <complex>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace bvm {

namespace {

// Plans are cached per (d, M, sign) and executed on per-call buffers through
// the new-array interface; FFTW_UNALIGNED keeps that valid for any buffer.
fftw_plan plan_for(int d, int M, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  static std::mutex mut;
  std::scoped_lock lock(mut);
  auto key = std::tuple{d, M, sign};
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  std::size_t n = d == 1 ? M : static_cast<std::size_t>(M) * M;
  std::vector<std::complex<double>> a(n), b(n);
  auto* pa = reinterpret_cast<fftw_complex*>(a.data());
  auto* pb = reinterpret_cast<fftw_complex*>(b.data());
  fftw_plan p = d == 1
      ? fftw_plan_dft_1d(M, pa, pb, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
      : fftw_plan_dft_2d(M, M, pa, pb, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  cache[key] = p;
  return p;
}

void run_dft(int d, int M, int sign, std::vector<std::complex<double>>& in,
             std::vector<std::complex<double>>& out) {
  fftw_execute_dft(plan_for(d, M, sign),
                   reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

int wrap(int k, int M) { return ((k % M) + M) % M; }

std::size_t grid_index(const FrequencyCut& cut, int j, int M) {
  const auto& k = cut.wavevector(j);
  if (cut.dim() == 1) return wrap(k[0], M);
  return static_cast<std::size_t>(wrap(k[0], M)) * M + wrap(k[1], M);
}

}  // namespace

int next_smooth(int n) {
  for (int m = std::max(n, 1);; ++m) {
    int r = m;
    for (int p : {2, 3, 5})
      while (r % p == 0) r /= p;
    if (r == 1) return m;
  }
}

Eigen::VectorXd synthesize(const SpectralField& f, int M) {
  const FrequencyCut& cut = f.cut();
  if (M < 2 * cut.radius() + 1)
    throw std::invalid_argument("synthesize: M < 2K+1 aliases the cut");
  std::size_t n = cut.dim() == 1 ? M : static_cast<std::size_t>(M) * M;
  std::vector<std::complex<double>> spec(n, 0.0), grid(n);
  for (int j = 0; j < cut.size(); ++j) spec[grid_index(cut, j, M)] += f.coeff(j);
  run_dft(cut.dim(), M, FFTW_BACKWARD, spec, grid);
  Eigen::VectorXd out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = grid[i].real();
  return out;
}

SpectralField analyze(const CutPtr& cut, const Eigen::VectorXd& grid, int M) {
  if (M < 2 * cut->radius() + 1)
    throw std::invalid_argument("analyze: M < 2K+1 aliases the cut");
  std::size_t n = cut->dim() == 1 ? M : static_cast<std::size_t>(M) * M;
  if (static_cast<std::size_t>(grid.size()) != n)
    throw std::invalid_argument("analyze: grid size does not match M");
  std::vector<std::complex<double>> in(n), spec(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = grid[i];
  run_dft(cut->dim(), M, FFTW_FORWARD, in, spec);
  double norm = 1.0 / static_cast<double>(n);
  Eigen::VectorXcd c(cut->size());
  for (int j = 0; j < cut->size(); ++j) c[j] = spec[grid_index(*cut, j, M)] * norm;
  return SpectralField(cut, std::move(c));
}

SpectralField pointwise_compose(const std::function<double(double)>& g,
                                const SpectralField& f, int M) {
  const FrequencyCut& cut = f.cut();
  if (M < 2 * (2 * cut.radius() + 1))
    throw std::invalid_argument("pointwise_compose: M below dealiasing margin 2(2K+1)");
  Eigen::VectorXd grid = synthesize(f, M);
  for (Eigen::Index i = 0; i < grid.size(); ++i) grid[i] = g(grid[i]);
  return analyze(f.cut_ptr(), grid, M);
}

std::string grid_to_csv(const SpectralField& f, int M) {
  Eigen::VectorXd grid = synthesize(f, M);
  std::ostringstream os;
  os.precision(17);
  if (f.cut().dim() == 1) {
    os << "x,value\n";
    for (int m = 0; m < M; ++m)
      os << static_cast<double>(m) / M << "," << grid[m] << "\n";
  } else {
    os << "x,y,value\n";
    for (int m1 = 0; m1 < M; ++m1)
      for (int m2 = 0; m2 < M; ++m2)
        os << static_cast<double>(m1) / M << "," << static_cast<double>(m2) / M
           << "," << grid[static_cast<std::size_t>(m1) * M + m2] << "\n";
  }
  return os.str();
}

}  // namespace bvm
