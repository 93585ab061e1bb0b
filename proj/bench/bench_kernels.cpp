// Serial reference kernels against their OpenMP versions on large inputs.

#include <benchmark/benchmark.h>

#include <vector>

#include "pmp/kernels.hpp"
#include "pmp/rng.hpp"
#include "pmp/sparse.hpp"

namespace {

using namespace pmp;

SparseMatrix random_matrix(std::size_t m, std::size_t n, std::size_t per_row) {
  CounterRng rng(7);
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t k = 0; k < per_row; ++k) t.push_back({i, static_cast<std::size_t>(rng.uniform_int(n)), rng.uniform_open()});
  }
  return SparseMatrix::from_triplets(m, n, std::move(t));
}

Vector random_vector(std::size_t n, std::uint64_t seed) {
  CounterRng rng(seed);
  Vector v(n);
  for (auto& e : v) e = rng.uniform(0.1, 2.0);
  return v;
}

template <bool Parallel>
void BM_Gather(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto a = random_matrix(m, m / 2, 16);
  const kernels::CsrView v{a.row_ptr(), a.col_idx(), a.values()};
  const auto x = random_vector(a.cols(), 1);
  Vector out(m);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::gather_rows(v, 0, m, x, out);
    } else {
      kernels::serial::gather_rows(v, 0, m, x, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * a.nnz()));
}

template <bool Parallel>
void BM_Entropy(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto x0 = random_vector(n, 2), xi = random_vector(n, 3);
  Vector out(n);
  for (auto _ : state) {
    std::size_t c;
    if constexpr (Parallel) {
      c = kernels::parallel::entropy_update(x0, xi, {}, 0.0, 0.5, out);
    } else {
      c = kernels::serial::entropy_update(x0, xi, {}, 0.0, 0.5, out);
    }
    benchmark::DoNotOptimize(c);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}

template <bool Parallel>
void BM_Dual(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto y = random_vector(m, 4), ax = random_vector(m, 5), c = random_vector(m, 6);
  Vector out(m);
  for (auto _ : state) {
    if constexpr (Parallel) {
      kernels::parallel::dual_update(y, ax, c, 0.3, out);
    } else {
      kernels::serial::dual_update(y, ax, c, 0.3, out);
    }
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * m));
}

}  // namespace

BENCHMARK(BM_Gather<false>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_Gather<true>)->Arg(1 << 14)->Arg(1 << 18);
BENCHMARK(BM_Entropy<false>)->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(BM_Entropy<true>)->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(BM_Dual<false>)->Arg(1 << 14)->Arg(1 << 20);
BENCHMARK(BM_Dual<true>)->Arg(1 << 14)->Arg(1 << 20);

BENCHMARK_MAIN();
