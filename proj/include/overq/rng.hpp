#pragma once

#include <cmath>
#include <cstdint>

namespace overq {

// Counter-based generator: the splitmix64 finalizer applied to
// key(seed, stream) + counter * golden. Streams keyed off the same seed are
// statistically independent, and a (seed, stream, counter) triple always maps
// to the same output, which is what the coupled-simulation construction needs.
//
// Stream ids used by the simulators:
//   0 arrivals, 1 per-customer patience, 2 service events, 3 service picks,
//   4 single-run event selection.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream)
      : key_(mix(seed ^ mix(stream * 0xD1B54A32D192ED03ULL + 0x9E3779B97F4A7C15ULL))) {}

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * 0x9E3779B97F4A7C15ULL); }

  // At a fixed counter without advancing (used for per-label patience draws).
  std::uint64_t at(std::uint64_t counter) const {
    return mix(key_ + counter * 0x9E3779B97F4A7C15ULL);
  }

  // Uniform in (0,1), 53-bit mantissa, never exactly 0.
  double next_u01() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

  double u01_at(std::uint64_t counter) const {
    return (static_cast<double>(at(counter) >> 11) + 0.5) * 0x1.0p-53;
  }

  double next_exp(double rate) { return -std::log(next_u01()) / rate; }

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace overq
