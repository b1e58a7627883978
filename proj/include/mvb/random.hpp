#pragma once

#include <cstdint>
#include <random>

#include "mvb/rational.hpp"

namespace mvb {

// Seeded generator with platform-independent draws (the standard
// distributions are implementation-defined, mt19937_64 itself is not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }
  // uniform integer in [lo, hi]
  long range(long lo, long hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(eng_() % span);
  }
  bool coin() { return (eng_() >> 17) & 1; }
  Rational small_int(long bound = 3) { return Rational(range(-bound, bound)); }
  Rational small_rational(long bound = 3) {
    long den = range(1, 3);
    return Rational(range(-bound, bound), den);
  }

 private:
  std::mt19937_64 eng_;
};

}  // namespace mvb
