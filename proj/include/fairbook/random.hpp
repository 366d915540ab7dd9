#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>

namespace fairbook {

// Bit-stable helpers on top of std::mt19937_64, whose output sequence is fixed
// by the standard. The <random> distributions are not, so draws are derived here.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// [0, 1) with 53 random bits.
inline double unit_from_bits(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

  std::uint64_t bits() { return engine_(); }
  double uniform() { return unit_from_bits(engine_()); }
  // (0, 1]
  double uniform_open_closed() { return 1.0 - uniform(); }

  // Uniform integer in [0, n) by rejection; n > 0.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  double normal() {
    // Box-Muller, one value per call.
    const double u1 = uniform_open_closed();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  template <typename T>
  void shuffle(std::span<T> xs) {
    for (std::size_t k = xs.size(); k > 1; --k) {
      std::swap(xs[k - 1], xs[below(k)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace fairbook
