#pragma once

// Data-parallel inner loops of the solvers. Every kernel exists twice:
// `serial` is the reference implementation used by the tests, `parallel`
// is the OpenMP version the solvers call. Each output element is computed
// by exactly one thread with the same arithmetic as the serial loop, so
// both produce bitwise-identical results for any thread count.

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>

namespace pmp::kernels {

// Exponent arguments of the multiplicative updates are clamped to this range.
inline constexpr double kExpClamp = 700.0;
// Loops shorter than this stay single-threaded.
inline constexpr std::size_t kParallelThreshold = 4096;

/// Positive root of y^2 + eta*y - beta_c = 0, i.e. the minimizer of
/// 1/2 y^2 + eta*y - beta_c*log(y). Written to avoid cancellation for
/// large positive eta and overflow of eta^2.
inline double log_barrier_root(double eta, double beta_c) {
  // hypot only when squaring could overflow or lose everything to underflow
  const double r = (std::abs(eta) < 1e150 && beta_c < 1e300 && beta_c > 1e-300)
                       ? std::sqrt(eta * eta + 4.0 * beta_c)
                       : std::hypot(eta, 2.0 * std::sqrt(beta_c));
  if (eta > 0.0) return 2.0 * beta_c / (eta + r);
  return 0.5 * (r - eta);
}

struct CsrView {
  std::span<const std::size_t> row_ptr;
  std::span<const std::uint32_t> col_idx;
  std::span<const double> values;
};

namespace serial {

// out[i - r0] = sum_k values[k] * x[col_idx[k]] over row i in [r0, r1)
void gather_rows(const CsrView& a, std::size_t r0, std::size_t r1, std::span<const double> x,
                 std::span<double> out);

// out_j = x0_j * exp(clamp(-(xi_j + pen_factor*pen_j) * inv_scale)); pen may be empty.
// Results that underflow are floored at the smallest normal double.
// Returns the number of clamped or floored coordinates.
std::size_t entropy_update(std::span<const double> x0, std::span<const double> xi,
                           std::span<const double> pen, double pen_factor, double inv_scale,
                           std::span<double> out);

// out_j = max(0, x0_j - (xi_j + pen_factor*pen_j) * inv_scale)
void euclidean_update(std::span<const double> x0, std::span<const double> xi,
                      std::span<const double> pen, double pen_factor, double inv_scale,
                      std::span<double> out);

// out_i = Q^gamma(gamma*ax_i - y_i) with coefficient c_i
void dual_update(std::span<const double> y, std::span<const double> ax,
                 std::span<const double> c, double gamma, std::span<double> out);

}  // namespace serial

namespace parallel {

void gather_rows(const CsrView& a, std::size_t r0, std::size_t r1, std::span<const double> x,
                 std::span<double> out);
std::size_t entropy_update(std::span<const double> x0, std::span<const double> xi,
                           std::span<const double> pen, double pen_factor, double inv_scale,
                           std::span<double> out);
void euclidean_update(std::span<const double> x0, std::span<const double> xi,
                      std::span<const double> pen, double pen_factor, double inv_scale,
                      std::span<double> out);
void dual_update(std::span<const double> y, std::span<const double> ax,
                 std::span<const double> c, double gamma, std::span<double> out);

}  // namespace parallel

}  // namespace pmp::kernels
