#include "pmp/rb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>

#include "detail/driver.hpp"
#include "pmp/rng.hpp"

namespace pmp {

BlockPartition BlockPartition::uniform(std::size_t m, std::size_t b) {
  if (b == 0 || b > m) throw std::invalid_argument("block count must lie in [1, m]");
  BlockPartition part;
  part.offsets.resize(b + 1);
  for (std::size_t k = 0; k <= b; ++k) part.offsets[k] = k * m / b;
  return part;
}

BlockPartition BlockPartition::from_offsets(std::vector<std::size_t> offsets, std::size_t m) {
  if (offsets.size() < 2 || offsets.front() != 0 || offsets.back() != m) {
    throw std::invalid_argument("block offsets must run from 0 to m");
  }
  for (std::size_t k = 0; k + 1 < offsets.size(); ++k) {
    if (offsets[k + 1] <= offsets[k]) throw std::invalid_argument("blocks must be nonempty and ordered");
  }
  BlockPartition part;
  part.offsets = std::move(offsets);
  return part;
}

double BlockConstants::max_block() const {
  return per_block.empty() ? 0.0 : *std::max_element(per_block.begin(), per_block.end());
}

namespace {

void finish(BlockConstants& bc) {
  const double b = static_cast<double>(bc.per_block.size());
  bc.aggregate = std::numeric_limits<double>::infinity();
  for (double l : bc.per_block) {
    if (l > 0.0) bc.aggregate = std::min(bc.aggregate, 1.0 / (std::sqrt(2.0 * b) * l));
  }
}

void check_partition(const BlockPartition& part, std::size_t m) {
  if (part.count() == 0 || part.offsets.front() != 0 || part.offsets.back() != m) {
    throw DimensionError("block partition does not cover the dual rows");
  }
}

}  // namespace

BlockConstants block_constants(const PoissonProblem& p, const BlockPartition& part) {
  check_partition(part, p.m());
  BlockConstants bc;
  for (std::size_t k = 0; k < part.count(); ++k) bc.per_block.push_back(operator_norm(p, part.begin(k), part.end(k)));
  finish(bc);
  return bc;
}

BlockConstants block_constants(const SparseMatrix& a, const BlockPartition& part, SetupKind kind) {
  check_partition(part, a.rows());
  BlockConstants bc;
  for (std::size_t k = 0; k < part.count(); ++k) {
    if (kind == SetupKind::entropy) {
      bc.per_block.push_back(a.max_column_norm(0, a.cols(), part.begin(k), part.end(k)));
    } else {
      const auto est = spectral_norm(a, part.begin(k), part.end(k));
      if (!est.converged) warn("power iteration hit the iteration cap; block norm may be inaccurate");
      bc.per_block.push_back(est.value);
    }
  }
  finish(bc);
  return bc;
}

SolveReport solve_rb_cmp(const PoissonProblem& p, const BlockPartition& part, const SolveOptions& opts,
                         std::uint64_t seed) {
  check_partition(part, p.m());
  const std::size_t b = part.count();
  detail::DriverConfig cfg;
  cfg.solver = "rb-cmp";
  cfg.block_count = b;
  cfg.incremental_aty = true;
  if (opts.policy.kind != StepsizePolicy::Kind::constant) {
    // gamma = sqrt(alpha) * aggregate  <=>  lipschitz = 1 / aggregate
    const auto bc = block_constants(p, part);
    cfg.lipschitz = std::isinf(bc.aggregate) ? 0.0 : 1.0 / bc.aggregate;
    for (double l : bc.per_block) {
      if (!std::isfinite(l)) cfg.lipschitz = l;
    }
  }
  const double total = static_cast<double>(p.n() + p.m());
  auto rng = std::make_shared<CounterRng>(seed);
  return detail::run_mirror_prox(p, opts, cfg, [&part, rng, b, n = p.n(), total](std::size_t) {
    const std::size_t k = b == 1 ? 0 : static_cast<std::size_t>(rng->uniform_int(b));
    return detail::BlockChoice{true, part.begin(k), part.end(k), k,
                               static_cast<double>(n + part.size(k)) / total};
  });
}

SolveReport solve_full_rb(const PoissonProblem& p, const BlockPartition& part, const SolveOptions& opts,
                          std::uint64_t seed, bool primal_own_block) {
  check_partition(part, p.m());
  const std::size_t nb = part.count() + (primal_own_block ? 1 : 0);
  detail::DriverConfig cfg;
  cfg.solver = "full-rb";
  cfg.block_count = nb;
  cfg.incremental_aty = true;
  if (opts.policy.kind != StepsizePolicy::Kind::constant) {
    const double l0 = primal_own_block ? 0.0 : operator_norm(p, part.begin(0), part.end(0));
    cfg.lipschitz = l0 > 0.0 ? l0 : operator_norm(p);
  }
  const double total = static_cast<double>(p.n() + p.m());
  auto rng = std::make_shared<CounterRng>(seed);
  return detail::run_mirror_prox(
      p, opts, cfg, [&part, rng, nb, primal_own_block, n = p.n(), total](std::size_t) {
        const std::size_t k = nb == 1 ? 0 : static_cast<std::size_t>(rng->uniform_int(nb));
        if (primal_own_block) {
          if (k == 0) return detail::BlockChoice{true, 0, 0, 0, static_cast<double>(n) / total};
          const std::size_t d = k - 1;
          return detail::BlockChoice{false, part.begin(d), part.end(d), k,
                                     static_cast<double>(part.size(d)) / total};
        }
        const bool primal = k == 0;
        return detail::BlockChoice{primal, part.begin(k), part.end(k), k,
                                   static_cast<double>((primal ? n : 0) + part.size(k)) / total};
      });
}

}  // namespace pmp
