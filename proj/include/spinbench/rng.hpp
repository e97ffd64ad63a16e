#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace spinbench {

// Seed mixing and the uniform/gaussian transforms are pinned here so that
// streams are reproducible across standard library implementations.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Independent stream for (base, stream id); chain calls for more ids.
constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  return splitmix64(splitmix64(base) ^ splitmix64(~stream));
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a,
                                    std::uint64_t b) {
  return derive_seed(derive_seed(base, a), b);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  std::uint64_t bits() { return eng_(); }

  // [0, 1), 53-bit resolution
  double uniform() { return double(eng_() >> 11) * 0x1.0p-53; }

  // unbiased integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = n * (~std::uint64_t(0) / n);
    std::uint64_t x;
    do {
      x = eng_();
    } while (x >= limit);
    return x % n;
  }

  int sign() { return (eng_() >> 63) ? -1 : 1; }

  // Marsaglia polar method; second variate cached
  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double mag = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * mag;
    has_spare_ = true;
    return u * mag;
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace spinbench
