#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "pmp/problem.hpp"
#include "pmp/report.hpp"

namespace pmp {

/// Iterates of the mirror-prox solvers. Averages are kept as gamma-weighted
/// sums of the extragradient points; rows of y (and x, for the fully
/// randomized variant) that sit out an iteration are accumulated lazily via
/// the weight marks, which is exact because they do not move in between.
struct SaddleState {
  Vector x, y;          // current iterate (x^t, y^t)
  Vector x_hat, y_hat;  // extragradient point; y_hat rows are refreshed only when their block moves
  Vector aty;           // cached A^T y
  Vector sum_x, sum_y;  // sum_t gamma_t * (x_hat^t, y_hat^t), flushed lazily
  double weight_sum = 0.0;
  double x_mark = 0.0;  // weight_sum when x was last flushed into sum_x
  Vector y_mark;        // same, per dual row
  std::size_t iteration = 0;

  bool average_defined() const { return weight_sum > 0.0; }
  Vector average_x() const;
  Vector average_y() const;
};

/// x^1 = shell point (or the given x0), y^1_i = c_i / (a_i^T x^1).
SaddleState initial_state(const PoissonProblem& p, const std::optional<Vector>& x0 = std::nullopt);

struct StepsizePolicy {
  enum class Kind { constant, theory, line_search };
  Kind kind = Kind::theory;
  double gamma = 0.0;   // constant value; initial trial for line search (0: theory value)
  double safety = 1.0;  // theory multiplier, <= 1
  double shrink = 0.5;
  double grow = 1.2;
  std::size_t max_shrinks = 60;
  double initial_scale = 1.0;  // line search without a given gamma starts at this multiple of the theory value

  static StepsizePolicy constant(double g) { return {Kind::constant, g}; }
  static StepsizePolicy theory(double safety = 1.0) { return {Kind::theory, 0.0, safety}; }
  static StepsizePolicy line_search(double initial = 0.0, double scale = 1.0) {
    StepsizePolicy p{Kind::line_search, initial};
    p.initial_scale = scale;
    return p;
  }
};

struct IterationInfo {
  std::size_t iteration;
  double gamma;
  double sigma;  // NaN unless computed (line search or track_sigma)
  const SaddleState& state;
};
using IterationObserver = std::function<void(const IterationInfo&)>;

struct SolveOptions {
  std::optional<double> alpha;  // default: theta_y / theta_x when both given, else 1
  std::optional<double> theta_x;
  std::optional<double> theta_y;
  StepsizePolicy policy;
  std::size_t max_iters = 1000;
  std::size_t report_every = 1;  // 0: only the first and last rows
  std::optional<double> pass_budget;
  std::optional<double> f_star;
  std::optional<Vector> x0;
  bool track_sigma = false;
  std::size_t refresh_every = 1000;  // RB: full A^T y recomputation period
  IterationObserver observer;
};

double resolve_alpha(const SolveOptions& opts);

/// One candidate mirror-prox step that updates the primal variable (if
/// `primal`) and the dual rows [r0, r1); everything else carries over.
/// With primal = true and the full row range this is the batch CMP step.
struct BlockStep {
  bool primal = true;
  std::size_t r0 = 0, r1 = 0;
  Vector x_hat, x_next;          // size n
  Vector y_hat, y_next;          // size r1 - r0
  Vector ax, ax_hat;             // A_B x^t, A_B x_hat
  Vector aty_hat;                // A^T y_hat (primal steps only)
  std::size_t clamps = 0;
};

void compute_block_step(const PoissonProblem& p, const SaddleState& state, double gamma,
                        double alpha, BlockStep& step);

/// sigma = gamma <F(u_hat) - F(u), u_hat - u_next> - Vagg(u_next, u_hat) - Vagg(u_hat, u)
/// with Vagg = alpha V_x + 1/2 ||.||_2^2. Nonpositive for gamma <= sqrt(alpha)/L.
struct SigmaParts {
  double coupling = 0.0;  // gamma <F(u_hat) - F(u), u_hat - u_next>
  double bregman = 0.0;   // Vagg(u_next, u_hat) + Vagg(u_hat, u)
  double noise = 0.0;     // eps^2-level floor: once the step is a few ulps long both terms are roundoff
  double sigma() const { return coupling - bregman; }
  /// sigma <= 0 up to roundoff. Overflowed terms count as positive.
  bool nonpositive() const {
    return std::isfinite(coupling) && std::isfinite(bregman) &&
           coupling <= bregman + 1e-12 * (std::abs(coupling) + bregman) + noise;
  }
};
SigmaParts step_sigma(const PoissonProblem& p, const SaddleState& state, const BlockStep& step,
                      double gamma, double alpha);

/// Moves the state to (x_next, y_next), updates the cached A^T y and the
/// weighted sums. `exact_aty` recomputes A^T y from scratch instead of
/// updating it incrementally.
void commit_block_step(const PoissonProblem& p, SaddleState& state, BlockStep& step, double gamma,
                       bool exact_aty);

/// One batch CMP step with stepsize gamma.
void cmp_step(const PoissonProblem& p, SaddleState& state, double gamma, double alpha);

enum class LineSearchDecision { accept, shrink };
LineSearchDecision line_search_accept(const PoissonProblem& p, const SaddleState& state,
                                      const BlockStep& step, double gamma, double alpha);

/// sqrt(alpha) / ||A||_{x->2}. Throws std::invalid_argument when the
/// primal geometry has no finite mass bound.
double theory_stepsize(const PoissonProblem& p, double alpha);

/// Batch composite mirror prox. History rows report f and the mass residual
/// at the averaged primal point.
SolveReport solve_cmp(const PoissonProblem& p, const SolveOptions& opts);

/// Picks alpha from `grid` by tuning_score of the solve_cmp history.
/// Values whose run stalls are skipped.
double tune_alpha(const PoissonProblem& p, std::span<const double> grid, const SolveOptions& opts,
                  TuneScore score = TuneScore::final_value);

}  // namespace pmp
