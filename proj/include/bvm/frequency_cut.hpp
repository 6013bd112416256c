#pragma once

#include <array>
#include <memory>
#include <vector>

namespace bvm {

// Symmetric frequency lattice {k in Z^d : max_i |k_i| <= K}, d in {1,2},
// ordered by |k|^2 and then lexicographically.  Index 0 is k = 0 and the
// lattice is closed under k -> -k.  The basis function attached to index j is
// e_j(x) = exp(2*pi*i k_j.x), orthonormal in L^2([0,1]^d).
//
// A real orthonormal chart shares the same index set: slot 0 is the constant
// function, and each +-k pair contributes sqrt(2)*cos(2*pi k.x) at the
// representative index (the lexicographically smaller of the pair) and
// sqrt(2)*sin(2*pi k.x) at its partner.
class FrequencyCut {
 public:
  FrequencyCut(int d, int K);

  int dim() const { return d_; }
  int radius() const { return K_; }
  int size() const { return static_cast<int>(lattice_.size()); }

  const std::array<int, 2>& wavevector(int j) const { return lattice_[j]; }
  double eigenvalue(int j) const { return eigenvalue_[j]; }  // 4 pi^2 |k_j|^2
  int negation(int j) const { return negation_[j]; }
  bool is_representative(int j) const { return j <= negation_[j]; }

  // index of a wavevector, -1 if outside the cut
  int index_of(const std::array<int, 2>& k) const;

  bool operator==(const FrequencyCut& o) const {
    return d_ == o.d_ && K_ == o.K_;
  }

 private:
  int d_;
  int K_;
  std::vector<std::array<int, 2>> lattice_;
  std::vector<double> eigenvalue_;
  std::vector<int> negation_;
  std::vector<int> index_map_;  // dense (2K+1)^d lookup
};

using CutPtr = std::shared_ptr<const FrequencyCut>;

CutPtr make_cut(int d, int K);

inline double laplacian_eigenvalue(const FrequencyCut& cut, int j) {
  return cut.eigenvalue(j);
}

struct SobolevIndex {
  double order = 0.0;
  bool zero_mean = false;
};

}  // namespace bvm
