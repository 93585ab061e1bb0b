#pragma once

// Shared iteration loop of the mirror-prox family (batch, partially and
// fully randomized). The variants differ only in which block a step
// updates and how that step is charged in effective passes.

#include <functional>
#include <string>

#include "pmp/cmp.hpp"

namespace pmp::detail {

struct BlockChoice {
  bool primal = true;
  std::size_t r0 = 0, r1 = 0;
  std::size_t index = 0;         // block id, for the selection counts
  double passes_per_eval = 1.0;  // cost of one operator evaluation restricted to the block
};

using BlockChooser = std::function<BlockChoice(std::size_t iteration)>;

struct DriverConfig {
  std::string solver;
  double lipschitz = 0.0;  // gamma_theory = safety * sqrt(alpha) / lipschitz
  std::size_t block_count = 1;
  bool incremental_aty = false;  // RB: update A^T y by block deltas, refresh periodically
};

SolveReport run_mirror_prox(const PoissonProblem& p, const SolveOptions& opts,
                            const DriverConfig& cfg, const BlockChooser& choose);

}  // namespace pmp::detail
