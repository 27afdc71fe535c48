#pragma once

#include <cmath>
#include <cstdint>

namespace qac {

// splitmix64-style avalanche: bijective mixing of a 64-bit word.
constexpr std::uint64_t avalanche64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Key for an independent substream of `base`. Streams drawn this way may be
// consumed in any order (or concurrently) without affecting each other.
constexpr std::uint64_t stream_key(std::uint64_t base, std::uint64_t stream) {
  return avalanche64(base ^ avalanche64(stream + 0x632be59bd9b4e019ULL));
}

// Counter-based generator: output i is a pure function of (key, i), so a
// stream is reproducible regardless of what other streams do. The increment
// is the usual golden-ratio constant.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return avalanche64(key_ + counter_);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double next_uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Standard normal via Box-Muller (portable across standard libraries,
  // unlike std::normal_distribution).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = next_double();
    while (u1 <= 0.0) u1 = next_double();
    const double u2 = next_double();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace qac
