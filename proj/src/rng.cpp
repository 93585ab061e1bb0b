#include "pmp/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace pmp {

std::uint64_t CounterRng::uniform_int(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("uniform_int: empty range");
  if (n == 1) return 0;
  // keep just enough top bits to cover n - 1, reject draws >= n
  const int shift = std::countl_zero(n - 1);
  for (;;) {
    const std::uint64_t v = next_u64() >> shift;
    if (v < n) return v;
  }
}

double CounterRng::exponential(double rate) { return -std::log(uniform_open()) / rate; }

std::uint64_t CounterRng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw std::invalid_argument("poisson: bad mean");
  constexpr double kPiece = 25.0;
  std::uint64_t total = 0;
  while (mean > 0.0) {
    const double mu = std::min(mean, kPiece);
    mean -= mu;
    // inversion by sequential search
    const double u = uniform();
    double p = std::exp(-mu);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf && k < 1000) {
      ++k;
      p *= mu / static_cast<double>(k);
      cdf += p;
    }
    total += k;
  }
  return total;
}

}  // namespace pmp
