#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lpvcert {

/// Deterministic random source: fixed bit-to-double conversion on top of
/// mt19937_64 so that seeded runs reproduce exactly across platforms.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  double uniform01() { return (gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Box-Muller; avoids the implementation-defined std::normal_distribution.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform01(), u2 = uniform01();
    while (u1 <= 1e-300) u1 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  uint64_t bits() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lpvcert
