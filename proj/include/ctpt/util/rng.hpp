#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ctpt {

// All sampling goes through these helpers instead of std distributions,
// whose outputs are implementation-defined. Keeps shard generation and
// training reproducible across compilers.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  // Uniform in [0, n). Modulo bias is irrelevant at the n we use.
  size_t uniform_index(size_t n) { return static_cast<size_t>(engine_() % n); }

  // Uniform double in [0, 1).
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (fresh pair each call; the spare is
  // dropped so the stream does not depend on call parity).
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  // Truncated normal: resample outside +-2 sigma.
  double truncated_normal(double sigma) {
    for (;;) {
      double x = normal() * sigma;
      if (std::fabs(x) <= 2.0 * sigma) return x;
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = uniform_index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ctpt
