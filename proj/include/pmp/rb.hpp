#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "pmp/cmp.hpp"

namespace pmp {

/// Contiguous split of the dual rows: block k is [offsets[k], offsets[k+1]).
struct BlockPartition {
  std::vector<std::size_t> offsets{0};

  std::size_t count() const { return offsets.size() - 1; }
  std::size_t begin(std::size_t k) const { return offsets[k]; }
  std::size_t end(std::size_t k) const { return offsets[k + 1]; }
  std::size_t size(std::size_t k) const { return offsets[k + 1] - offsets[k]; }

  /// b nearly equal blocks (sizes differ by at most one). Requires 1 <= b <= m.
  static BlockPartition uniform(std::size_t m, std::size_t b);
  /// Validates: starts at 0, ends at m, strictly increasing.
  static BlockPartition from_offsets(std::vector<std::size_t> offsets, std::size_t m);
};

struct BlockConstants {
  std::vector<double> per_block;  // L_k = ||A_k||_{x->2}
  double aggregate = 0.0;         // min_k 1 / (sqrt(2b) L_k)

  double max_block() const;
};

/// Per-block operator norms. For the entropy setup these are max column
/// norms of A_k (scaled by the primal geometry); Euclidean uses power iteration.
BlockConstants block_constants(const PoissonProblem& p, const BlockPartition& part);
BlockConstants block_constants(const SparseMatrix& a, const BlockPartition& part, SetupKind kind);

/// Partially randomized block mirror prox: x moves every iteration, only
/// the uniformly drawn dual block k_t does. A^T y is maintained
/// incrementally and recomputed every opts.refresh_every iterations.
/// The theory policy uses gamma = sqrt(alpha) * min_k 1/(sqrt(2b) L_k).
SolveReport solve_rb_cmp(const PoissonProblem& p, const BlockPartition& part,
                         const SolveOptions& opts, std::uint64_t seed);

/// Fully randomized block mirror prox over u = [x; y]. Block 0 is x
/// together with the first dual block (or x alone when
/// `primal_own_block`); one uniformly drawn block moves per iteration.
/// The theory policy uses gamma = sqrt(alpha) / ||A_0||, A_0 being the rows
/// that share a block with x, falling back to the full ||A|| when x sits alone.
SolveReport solve_full_rb(const PoissonProblem& p, const BlockPartition& part,
                          const SolveOptions& opts, std::uint64_t seed,
                          bool primal_own_block = false);

}  // namespace pmp
