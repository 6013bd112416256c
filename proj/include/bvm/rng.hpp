#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

namespace bvm {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Seed for a named substream of a master seed.  Stages and replication cells
// each get their own stream so results do not depend on evaluation order.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view tag,
                                    std::uint64_t index = 0) {
  std::uint64_t s = master ^ 0x6a09e667f3bcc909ull;
  for (char ch : tag) {
    s ^= static_cast<std::uint64_t>(static_cast<unsigned char>(ch));
    splitmix64(s);
  }
  s ^= index * 0x9e3779b97f4a7c15ull;
  splitmix64(s);
  return s;
}

// mt19937_64 with an explicit Box-Muller normal so draws are identical across
// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t integer() { return eng_(); }

  // uniform on (0,1)
  double uniform() {
    double u;
    do {
      u = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    } while (u <= 0.0);
    return u;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace bvm
