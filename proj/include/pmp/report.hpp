#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "pmp/common.hpp"

namespace pmp {

struct HistoryRow {
  std::size_t iteration = 0;
  double passes = 0.0;
  double objective = 0.0;
  std::optional<double> rel_subopt;
  double mass_residual = 0.0;
  double elapsed_ms = 0.0;
};

struct SolveDiagnostics {
  std::size_t clamp_events = 0;      // clamped exponents in entropy updates
  std::size_t shrinks = 0;           // rejected line-search / backtracking trials
  std::size_t restarts = 0;          // APG momentum restarts
  std::size_t sigma_checks = 0;
  std::size_t sigma_violations = 0;  // steps with sigma > 0 (beyond roundoff)
  double max_sigma = -std::numeric_limits<double>::infinity();
  double max_cache_drift = 0.0;      // RB: ||cached A^T y - exact||_inf at refreshes
  double lipschitz = 0.0;            // operator-norm constant behind the theory stepsize
  double alpha = 1.0;
  std::optional<double> theory_bound;  // (alpha Theta_x + Theta_y) / sum gamma when given
  std::vector<std::size_t> block_counts;  // RB: how often each block was selected
};

struct SolveReport {
  std::string solver;
  std::vector<HistoryRow> history;
  Vector final_x;  // averaged primal output, or the start point when no step ran
  Vector final_y;
  Vector last_x;   // last iterate (not averaged)
  bool average_defined = false;
  double weight_sum = 0.0;
  double passes = 0.0;
  SolveDiagnostics diagnostics;
};

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// CSV with header `iter,passes,objective,rel_subopt,mass_residual,elapsed_ms`,
/// preceded by one `# ` line per comment. rel_subopt is blank when absent.
void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows,
                       const std::vector<std::string>& comments);

/// Resamples a history onto the grid passes = step, 2 step, ..., <= budget:
/// each grid row carries the latest recorded iterate whose cumulative passes
/// do not exceed the grid value, with `passes` set to the grid value.
/// The input history must be recorded densely (every iteration) to be exact.
std::vector<HistoryRow> align_to_pass_grid(const std::vector<HistoryRow>& rows, double step,
                                           double budget);

/// Writes to a sibling temporary file and renames it over `path`, so a
/// failed write never leaves a partial file. Throws std::runtime_error.
void write_text_atomic(const std::string& path, const std::string& content);

enum class TuneScore {
  final_value,  // objective of the last row
  area,         // sum of objectives on a 50-point pass grid (needs a pass budget), else over all rows
};

/// Lower is better. Rows must be dense for the pass-grid variant.
double tuning_score(const std::vector<HistoryRow>& rows, TuneScore score, std::optional<double> pass_budget);

/// (f - f*) / (f_1 - f*) where f_1 is the objective at the start point. The
/// denominator is floored at sqrt(eps) * max(1, |f*|).
void fill_relative_suboptimality(std::vector<HistoryRow>& rows, double f_star);

}  // namespace pmp
