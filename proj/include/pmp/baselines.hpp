#pragma once

#include <span>
#include <vector>

#include "pmp/cmp.hpp"

namespace pmp {

struct BaselineConfig {
  enum class Kind { mirror_descent, prox_grad, acc_prox_grad };
  Kind kind = Kind::mirror_descent;
  double gamma0 = 1.0;       // MD: gamma_t = gamma0 / sqrt(t)
  double lipschitz0 = 1.0;   // PG/APG: initial curvature estimate
  double backtrack = 2.0;    // curvature multiplier on rejection
  double relax = 0.9;        // curvature multiplier after an accepted step
  std::size_t max_rejections = 200;
};

/// Gradient of the smooth part s^T x - sum c_i log(a_i^T x). Throws
/// DomainError if some a_i^T x <= 0.
Vector smooth_gradient(const PoissonProblem& p, std::span<const double> x);

/// Composite entropic mirror descent from the CMP start point. The output
/// is the gamma-weighted average of the iterates; history objectives are
/// best-so-far values of that average.
SolveReport solve_md(const PoissonProblem& p, double gamma0, const SolveOptions& opts);

/// Best gamma0 from `grid` by tuning_score; diverging values are skipped.
double tune_md_stepsize(const PoissonProblem& p, std::span<const double> grid, const SolveOptions& opts,
                        TuneScore score = TuneScore::final_value);

/// Proximal gradient on x >= 0 with domain-safe backtracking. Requires the
/// Euclidean setup. History objectives are best-so-far.
SolveReport solve_pg(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts);

/// FISTA with the same backtracking; momentum restarts when the
/// extrapolated point leaves {A x > 0}.
SolveReport solve_apg(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts);

SolveReport solve_baseline(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts);

}  // namespace pmp
