#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "pmp/cmp.hpp"

namespace pmp {

/// Column-stochastic system matrix: every column gets ceil(density * m)
/// distinct random rows whose positive weights sum to one.
SparseMatrix generate_system_matrix(std::size_t m, std::size_t n, double density, std::uint64_t seed);

/// Concentric-disc phantom on a side x side grid, row-major, values in [0, 1]
/// with a faint background so that every pixel is positive.
Vector generate_phantom(std::size_t side);

enum class CountMode { noiseless, poisson };

/// noiseless: w = A x_true; poisson: w_i ~ Poisson([A x_true]_i) with the given seed.
Vector simulate_counts(const SparseMatrix& a, const Vector& x_true, CountMode mode, std::uint64_t seed = 0);

struct PETInstance {
  SparseMatrix a;  // all detector rows, zero-count ones included
  Vector w;
  double theta = 0.0;  // sum of w
  std::optional<Vector> x_true;
  bool noiseless = false;

  static PETInstance make(SparseMatrix a, Vector w, std::optional<Vector> x_true = std::nullopt,
                          bool noiseless = false);
  /// min sum x - sum w_i log(a_i^T x) over {x >= 0, sum x = theta}; zero-count
  /// rows are dropped, their columns still contribute to s = A^T 1.
  PoissonProblem problem() const;
  /// f(x_true) when the counts are noiseless.
  std::optional<double> optimal_value() const;
};

/// CMP with the exact-mass entropy setup. When f* is known the history's
/// rel_subopt column holds (f - f*) / |f*|.
SolveReport solve_pet(const PETInstance& inst, const SolveOptions& opts);

/// Counts: one value per line.
Vector read_counts(const std::string& path);
void write_counts(const std::string& path, const Vector& w);
/// Flattened image, one value per line.
void write_image_csv(const std::string& path, const Vector& x);

}  // namespace pmp
