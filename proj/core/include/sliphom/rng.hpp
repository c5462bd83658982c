#pragma once

#include <cstdint>
#include <random>

namespace sliphom {

// Deterministic uniform sampling independent of the standard library's
// distribution implementations, so seeded runs reproduce byte-identically
// across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  double next01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double a, double b) { return a + (b - a) * next01(); }
  int uniform_int(int a, int b) {  // inclusive bounds
    return a + static_cast<int>(eng_() % static_cast<uint64_t>(b - a + 1));
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace sliphom
