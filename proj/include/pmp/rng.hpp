#pragma once

#include <cstdint>

namespace pmp {

/// Counter-based 64-bit generator: the k-th draw is the SplitMix64 finalizer
/// applied to seed + (k + 1) * 0x9E3779B97F4A7C15. Outputs depend only on
/// (seed, k), so streams are reproducible across platforms and compilers.
///
/// Integer ranges use rejection sampling on the top bits (no modulo bias);
/// doubles take the top 53 bits.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : key_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = key_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
  // (0, 1)
  double uniform_open() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform on {0, ..., n-1}; n must be positive.
  std::uint64_t uniform_int(std::uint64_t n);

  double exponential(double rate);
  /// Exact Poisson draw: sequential-search inversion for means below 30,
  /// larger means are split into independent pieces of mean < 30 and summed.
  std::uint64_t poisson(double mean);

  std::uint64_t draws() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace pmp
