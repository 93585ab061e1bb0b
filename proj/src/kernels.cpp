#include "pmp/kernels.hpp"

#include <algorithm>
#include <limits>

namespace pmp::kernels {

namespace {

inline double row_dot(const CsrView& a, std::size_t i, std::span<const double> x) {
  double acc = 0.0;
  for (std::size_t k = a.row_ptr[i]; k < a.row_ptr[i + 1]; ++k) acc += a.values[k] * x[a.col_idx[k]];
  return acc;
}

inline double entropy_one(double x0, double arg, std::size_t& clamps) {
  if (arg > kExpClamp) {
    arg = kExpClamp;
    ++clamps;
  } else if (arg < -kExpClamp) {
    arg = -kExpClamp;
    ++clamps;
  }
  double v = x0 * std::exp(arg);
  if (v < std::numeric_limits<double>::min()) {
    v = std::numeric_limits<double>::min();
    ++clamps;
  }
  return v;
}

inline double pen_at(std::span<const double> pen, std::size_t j) { return pen.empty() ? 0.0 : pen[j]; }

}  // namespace

namespace serial {

void gather_rows(const CsrView& a, std::size_t r0, std::size_t r1, std::span<const double> x,
                 std::span<double> out) {
  for (std::size_t i = r0; i < r1; ++i) out[i - r0] = row_dot(a, i, x);
}

std::size_t entropy_update(std::span<const double> x0, std::span<const double> xi,
                           std::span<const double> pen, double pen_factor, double inv_scale,
                           std::span<double> out) {
  std::size_t clamps = 0;
  for (std::size_t j = 0; j < x0.size(); ++j) {
    out[j] = entropy_one(x0[j], -(xi[j] + pen_factor * pen_at(pen, j)) * inv_scale, clamps);
  }
  return clamps;
}

void euclidean_update(std::span<const double> x0, std::span<const double> xi,
                      std::span<const double> pen, double pen_factor, double inv_scale,
                      std::span<double> out) {
  for (std::size_t j = 0; j < x0.size(); ++j) {
    out[j] = std::max(0.0, x0[j] - (xi[j] + pen_factor * pen_at(pen, j)) * inv_scale);
  }
}

void dual_update(std::span<const double> y, std::span<const double> ax,
                 std::span<const double> c, double gamma, std::span<double> out) {
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = log_barrier_root(gamma * ax[i] - y[i], gamma * c[i]);
  }
}

}  // namespace serial

namespace parallel {

void gather_rows(const CsrView& a, std::size_t r0, std::size_t r1, std::span<const double> x,
                 std::span<double> out) {
  // short loops skip the runtime entirely; entering a parallel region costs microseconds
  if (a.row_ptr[r1] - a.row_ptr[r0] < kParallelThreshold) return serial::gather_rows(a, r0, r1, x, out);
  const auto count = static_cast<std::ptrdiff_t>(r1 - r0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < count; ++k) {
    const auto i = r0 + static_cast<std::size_t>(k);
    out[static_cast<std::size_t>(k)] = row_dot(a, i, x);
  }
}

std::size_t entropy_update(std::span<const double> x0, std::span<const double> xi,
                           std::span<const double> pen, double pen_factor, double inv_scale,
                           std::span<double> out) {
  if (x0.size() < kParallelThreshold) return serial::entropy_update(x0, xi, pen, pen_factor, inv_scale, out);
  const auto n = static_cast<std::ptrdiff_t>(x0.size());
  std::size_t clamps = 0;
#pragma omp parallel for schedule(static) reduction(+ : clamps)
  for (std::ptrdiff_t jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    out[j] = entropy_one(x0[j], -(xi[j] + pen_factor * pen_at(pen, j)) * inv_scale, clamps);
  }
  return clamps;
}

void euclidean_update(std::span<const double> x0, std::span<const double> xi,
                      std::span<const double> pen, double pen_factor, double inv_scale,
                      std::span<double> out) {
  if (x0.size() < kParallelThreshold) return serial::euclidean_update(x0, xi, pen, pen_factor, inv_scale, out);
  const auto n = static_cast<std::ptrdiff_t>(x0.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    out[j] = std::max(0.0, x0[j] - (xi[j] + pen_factor * pen_at(pen, j)) * inv_scale);
  }
}

void dual_update(std::span<const double> y, std::span<const double> ax,
                 std::span<const double> c, double gamma, std::span<double> out) {
  if (y.size() < kParallelThreshold) return serial::dual_update(y, ax, c, gamma, out);
  const auto m = static_cast<std::ptrdiff_t>(y.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t ii = 0; ii < m; ++ii) {
    const auto i = static_cast<std::size_t>(ii);
    out[i] = log_barrier_root(gamma * ax[i] - y[i], gamma * c[i]);
  }
}

}  // namespace parallel

}  // namespace pmp::kernels
