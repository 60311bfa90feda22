#pragma once

#include <cmath>
#include <cstdint>

#include "fringefree/mathutil.hpp"

namespace fringefree {

// Counter-free splitmix64 generator. The standard library distributions are
// implementation-defined, so uniform and gaussian draws are spelled out here
// to keep renders bit-identical for a given seed on any platform.
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  // Decorrelated stream for (seed, a, b), e.g. (global seed, frame, row).
  static Rng stream(uint64_t seed, uint64_t a, uint64_t b) {
    Rng mix(seed);
    uint64_t s = mix.next_u64();
    s ^= Rng(a + 0x9e3779b97f4a7c15ULL).next_u64();
    s = s * 0xbf58476d1ce4e5b9ULL + b;
    return Rng(s);
  }

  uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; pairs are cached.
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = kTwoPi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  int uniform_int(int lo, int hi) {  // inclusive bounds
    return lo + static_cast<int>(next_u64() % static_cast<uint64_t>(hi - lo + 1));
  }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace fringefree
