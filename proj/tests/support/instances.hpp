#pragma once

// Seeded random problem instances shared by the unit and acceptance tests.

#include <cstdint>
#include <vector>

#include "pmp/problem.hpp"
#include "pmp/rng.hpp"

namespace pmp::testing {

// n x m Poisson regression: A has uniform(0,1) entries at the given density,
// x_true ~ uniform(0.5, 1.5), c ~ Poisson(A x_true), s = A^T 1.
inline PoissonProblem random_instance(std::uint64_t seed, double lambda1, std::size_t n = 20,
                                      std::size_t m = 100, double density = 0.5,
                                      ProximalSetup setup = ProximalSetup::entropy_shell_capped()) {
  CounterRng rng(seed);
  std::vector<Triplet> trip;
  for (std::size_t i = 0; i < m; ++i) {
    bool any = false;
    for (std::size_t j = 0; j < n; ++j) {
      if (rng.uniform() < density) {
        trip.push_back({i, j, rng.uniform_open()});
        any = true;
      }
    }
    if (!any) trip.push_back({i, static_cast<std::size_t>(rng.uniform_int(n)), rng.uniform_open()});
  }
  auto a = SparseMatrix::from_triplets(m, n, trip);
  Vector x_true(n);
  for (auto& v : x_true) v = rng.uniform(0.5, 1.5);
  Vector mean(m);
  a.multiply(x_true, mean);
  Vector c(m);
  for (std::size_t i = 0; i < m; ++i) c[i] = static_cast<double>(rng.poisson(mean[i]));
  Vector s = a.column_sums();
  return PoissonProblem::assemble(std::move(s), std::move(c), std::move(a), PenaltySpec::l1(lambda1, n),
                                  std::move(setup));
}

// The 1-D instance s = 1, c = 1, A = (1): f(x) = x - log x, f* = 1 at x* = 1.
inline PoissonProblem unit_instance(ProximalSetup setup = ProximalSetup::entropy_shell_capped()) {
  return PoissonProblem::assemble({1.0}, {1.0}, SparseMatrix::identity(1), PenaltySpec::none(), std::move(setup));
}

}  // namespace pmp::testing
