#pragma once

#include <cmath>
#include <cstdint>

#include "s4/common.hpp"

namespace s4 {

// Splitmix64 stream with Box-Muller normals. Self-contained so that sampled
// values are identical across platforms and standard libraries; std::
// distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Complex cnormal() {
    double re = normal();
    double im = normal();
    return {re, im};
  }

  // Independent derived stream; (seed, tag) -> stream is a pure function of
  // its arguments, so forks can run in parallel without ordering effects.
  Rng fork(std::uint64_t tag) const {
    Rng mix(state_ ^ (0x9e3779b97f4a7c15ULL * (tag + 0x632be59bd9b4e019ULL)));
    std::uint64_t s = mix.next_u64();
    return Rng(s);
  }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace s4
