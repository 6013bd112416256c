#include "bvm/frequency_cut.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bvm {

FrequencyCut::FrequencyCut(int d, int K) : d_(d), K_(K) {
  if (d != 1 && d != 2) throw std::invalid_argument("FrequencyCut: d must be 1 or 2");
  if (K < 1) throw std::invalid_argument("FrequencyCut: K must be >= 1");

  if (d == 1) {
    for (int k = -K; k <= K; ++k) lattice_.push_back({k, 0});
  } else {
    for (int k1 = -K; k1 <= K; ++k1)
      for (int k2 = -K; k2 <= K; ++k2) lattice_.push_back({k1, k2});
  }
  std::sort(lattice_.begin(), lattice_.end(),
            [](const std::array<int, 2>& a, const std::array<int, 2>& b) {
              long na = static_cast<long>(a[0]) * a[0] + static_cast<long>(a[1]) * a[1];
              long nb = static_cast<long>(b[0]) * b[0] + static_cast<long>(b[1]) * b[1];
              if (na != nb) return na < nb;
              return a < b;
            });

  int side = 2 * K + 1;
  index_map_.assign(d == 1 ? side : side * side, -1);
  auto flat = [&](const std::array<int, 2>& k) {
    int i1 = k[0] + K_;
    if (d_ == 1) return i1;
    return i1 * side + (k[1] + K_);
  };
  for (int j = 0; j < size(); ++j) index_map_[flat(lattice_[j])] = j;

  eigenvalue_.resize(size());
  negation_.resize(size());
  for (int j = 0; j < size(); ++j) {
    const auto& k = lattice_[j];
    double n2 = static_cast<double>(k[0]) * k[0] + static_cast<double>(k[1]) * k[1];
    eigenvalue_[j] = 4.0 * M_PI * M_PI * n2;
    negation_[j] = index_map_[flat({-k[0], -k[1]})];
  }
}

int FrequencyCut::index_of(const std::array<int, 2>& k) const {
  if (std::abs(k[0]) > K_ || std::abs(k[1]) > K_) return -1;
  if (d_ == 1 && k[1] != 0) return -1;
  int i1 = k[0] + K_;
  int flat = d_ == 1 ? i1 : i1 * (2 * K_ + 1) + (k[1] + K_);
  return index_map_[flat];
}

CutPtr make_cut(int d, int K) { return std::make_shared<FrequencyCut>(d, K); }

}  // namespace bvm
