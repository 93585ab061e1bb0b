#include "pmp/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmp {

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

// Best-so-far history bookkeeping shared by the baselines.
class History {
 public:
  History(const PoissonProblem& p, const SolveOptions& opts) : p_(p), opts_(opts) {}

  void record(std::size_t iter, double passes, std::span<const double> x, double elapsed) {
    const double f = objective_or_inf(p_, x);
    if (rows_.empty() || f < best_) {
      best_ = f;
      best_residual_ = mass_identity_residual(p_, x);
    }
    rows_.push_back(HistoryRow{iter, passes, best_, std::nullopt, best_residual_, elapsed});
  }
  bool due(std::size_t iter, bool last) const {
    return last || (opts_.report_every > 0 && iter % opts_.report_every == 0);
  }
  std::size_t last_iteration() const { return rows_.back().iteration; }
  std::vector<HistoryRow> take() {
    if (opts_.f_star) fill_relative_suboptimality(rows_, *opts_.f_star);
    return std::move(rows_);
  }

 private:
  const PoissonProblem& p_;
  const SolveOptions& opts_;
  std::vector<HistoryRow> rows_;
  double best_ = std::numeric_limits<double>::infinity();
  double best_residual_ = 0.0;
};

// Smooth part L(x) = s^T x - sum c_i log(a_i^T x); +inf outside the domain.
double smooth_value(const PoissonProblem& p, std::span<const double> x, Vector& ax) {
  ax.assign(p.m(), 0.0);
  p.a().multiply(x, ax);
  double v = 0.0;
  for (std::size_t j = 0; j < p.n(); ++j) v += p.s()[j] * x[j];
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (!(ax[i] > 0.0)) return std::numeric_limits<double>::infinity();
    v -= p.c()[i] * std::log(ax[i]);
  }
  return v;
}

Vector start_point(const PoissonProblem& p, const SolveOptions& opts) {
  if (!opts.x0) return shell_initial_point(p);
  if (opts.x0->size() != p.n()) throw DimensionError("start point has the wrong length");
  return *opts.x0;
}

void require_euclidean(const PoissonProblem& p, const char* who) {
  if (p.setup().kind != SetupKind::euclidean) {
    throw std::invalid_argument(std::string(who) + " requires the Euclidean setup");
  }
}

struct GradientStep {
  Vector x;
  double value;  // L(x)
  Vector ax;
};

// One backtracking proximal-gradient step from z (with L(z) = lz, grad g).
// Returns the accepted point; updates the curvature estimate and counters.
GradientStep backtrack(const PoissonProblem& p, const BaselineConfig& cfg, std::span<const double> z,
                       double lz, const Vector& g, double& curvature, double& passes,
                       SolveDiagnostics& diag, std::size_t iter) {
  const auto pen = p.penalty().weights();
  GradientStep out;
  out.x.resize(p.n());
  for (std::size_t rejected = 0;; ++rejected) {
    if (rejected >= cfg.max_rejections) {
      throw StallError("backtracking: " + std::to_string(rejected) + " consecutive rejections at iteration " +
                       std::to_string(iter));
    }
    for (std::size_t j = 0; j < p.n(); ++j) {
      const double w = pen.empty() ? 0.0 : pen[j];
      out.x[j] = std::max(0.0, z[j] - (g[j] + w) / curvature);
    }
    out.value = smooth_value(p, out.x, out.ax);
    passes += 0.5;
    bool ok = std::isfinite(out.value);
    if (ok) {
      double lin = 0.0, sq = 0.0;
      for (std::size_t j = 0; j < p.n(); ++j) {
        const double d = out.x[j] - z[j];
        lin += g[j] * d;
        sq += d * d;
      }
      ok = out.value <= lz + lin + 0.5 * curvature * sq + 1e-12 * std::abs(lz);
    }
    if (ok) break;
    ++diag.shrinks;
    curvature *= cfg.backtrack;
  }
  curvature *= cfg.relax;
  return out;
}

Vector gradient_from_ax(const PoissonProblem& p, const Vector& ax) {
  Vector r(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (!(ax[i] > 0.0)) throw DomainError("gradient requested outside the log domain");
    r[i] = p.c()[i] / ax[i];
  }
  Vector g(p.n());
  p.a().multiply_transpose(r, g);
  for (std::size_t j = 0; j < p.n(); ++j) g[j] = p.s()[j] - g[j];
  return g;
}

}  // namespace

Vector smooth_gradient(const PoissonProblem& p, std::span<const double> x) {
  Vector ax(p.m());
  p.a().multiply(x, ax);
  return gradient_from_ax(p, ax);
}

SolveReport solve_md(const PoissonProblem& p, double gamma0, const SolveOptions& opts) {
  if (!(gamma0 > 0.0)) throw std::invalid_argument("gamma0 must be positive");
  const double alpha = resolve_alpha(opts);
  SolveReport rep;
  rep.solver = "md";
  rep.diagnostics.alpha = alpha;
  History hist(p, opts);
  Vector x = start_point(p, opts);
  Vector sum(p.n(), 0.0), next(p.n()), avg(p.n());
  double wsum = 0.0, passes = 0.0, elapsed = 0.0;
  hist.record(0, 0.0, x, 0.0);
  std::size_t t = 0;
  for (; t < opts.max_iters; ++t) {
    if (opts.pass_budget && passes >= *opts.pass_budget) break;
    const auto t0 = Clock::now();
    const double gamma = gamma0 / std::sqrt(static_cast<double>(t + 1));
    Vector g = smooth_gradient(p, x);
    for (auto& v : g) v *= gamma;
    rep.diagnostics.clamp_events += primal_prox(p.setup(), x, g, p.penalty().weights(), gamma, alpha, next);
    for (std::size_t j = 0; j < p.n(); ++j) sum[j] += gamma * x[j];
    wsum += gamma;
    x.swap(next);
    passes += 1.0;
    elapsed += ms_since(t0);
    if (hist.due(t + 1, t + 1 == opts.max_iters)) {
      for (std::size_t j = 0; j < p.n(); ++j) avg[j] = sum[j] / wsum;
      hist.record(t + 1, passes, avg, elapsed);
    }
  }
  if (hist.last_iteration() != t) {
    // stopped by the pass budget between reports
    for (std::size_t j = 0; j < p.n(); ++j) avg[j] = sum[j] / wsum;
    hist.record(t, passes, avg, elapsed);
  }
  rep.history = hist.take();
  rep.average_defined = wsum > 0.0;
  rep.weight_sum = wsum;
  if (rep.average_defined) {
    for (std::size_t j = 0; j < p.n(); ++j) avg[j] = sum[j] / wsum;
    rep.final_x = avg;
  } else {
    rep.final_x = x;
  }
  rep.last_x = x;
  Vector ax(p.m());
  p.a().multiply(rep.final_x, ax);
  rep.final_y.resize(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) rep.final_y[i] = p.c()[i] / ax[i];
  rep.passes = passes;
  return rep;
}

double tune_md_stepsize(const PoissonProblem& p, std::span<const double> grid, const SolveOptions& opts,
                        TuneScore score) {
  if (grid.empty()) throw std::invalid_argument("empty stepsize grid");
  SolveOptions o = opts;
  o.report_every = score == TuneScore::area ? 1 : 0;
  o.f_star.reset();
  double best = grid.front(), best_f = std::numeric_limits<double>::infinity();
  for (double g : grid) {
    double f = std::numeric_limits<double>::infinity();
    try {
      f = tuning_score(solve_md(p, g, o).history, score, o.pass_budget);
    } catch (const DomainError&) {
      // diverged: leave it out
    }
    if (f < best_f) {
      best_f = f;
      best = g;
    }
  }
  return best;
}

namespace {

SolveReport proximal_gradient(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts,
                              bool accelerated) {
  require_euclidean(p, accelerated ? "apg" : "pg");
  if (!(cfg.lipschitz0 > 0.0)) throw std::invalid_argument("initial curvature must be positive");
  SolveReport rep;
  rep.solver = accelerated ? "apg" : "pg";
  auto& diag = rep.diagnostics;
  History hist(p, opts);
  Vector x = start_point(p, opts);
  Vector ax;
  double lx = smooth_value(p, x, ax);
  if (!std::isfinite(lx)) throw DomainError("start point outside the log domain");
  Vector x_prev = x;
  double momentum = 1.0;
  double curvature = cfg.lipschitz0;
  double passes = 0.0, elapsed = 0.0;
  hist.record(0, 0.0, x, 0.0);
  std::size_t t = 0;
  Vector z(p.n()), az;
  for (; t < opts.max_iters; ++t) {
    if (opts.pass_budget && passes >= *opts.pass_budget) break;
    const auto t0 = Clock::now();
    double lz = lx;
    const Vector* zp = &x;
    const Vector* azp = &ax;
    double next_momentum = 1.0;
    if (accelerated) {
      next_momentum = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum * momentum));
      const double beta = (momentum - 1.0) / next_momentum;
      for (std::size_t j = 0; j < p.n(); ++j) z[j] = x[j] + beta * (x[j] - x_prev[j]);
      lz = smooth_value(p, z, az);
      passes += 0.5;
      if (std::isfinite(lz)) {
        zp = &z;
        azp = &az;
      } else {
        ++diag.restarts;
        lz = lx;
        next_momentum = 1.0;
      }
    }
    const Vector g = gradient_from_ax(p, *azp);
    passes += 0.5;
    GradientStep step = backtrack(p, cfg, *zp, lz, g, curvature, passes, diag, t + 1);
    x_prev.swap(x);
    x = std::move(step.x);
    ax = std::move(step.ax);
    lx = step.value;
    momentum = next_momentum;
    elapsed += ms_since(t0);
    if (hist.due(t + 1, t + 1 == opts.max_iters)) hist.record(t + 1, passes, x, elapsed);
  }
  if (hist.last_iteration() != t) hist.record(t, passes, x, elapsed);
  rep.history = hist.take();
  diag.lipschitz = curvature;
  rep.final_x = x;
  rep.last_x = x;
  rep.final_y.resize(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) rep.final_y[i] = p.c()[i] / ax[i];
  rep.passes = passes;
  return rep;
}

}  // namespace

SolveReport solve_pg(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts) {
  return proximal_gradient(p, cfg, opts, false);
}

SolveReport solve_apg(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts) {
  return proximal_gradient(p, cfg, opts, true);
}

SolveReport solve_baseline(const PoissonProblem& p, const BaselineConfig& cfg, const SolveOptions& opts) {
  switch (cfg.kind) {
    case BaselineConfig::Kind::mirror_descent: return solve_md(p, cfg.gamma0, opts);
    case BaselineConfig::Kind::prox_grad: return solve_pg(p, cfg, opts);
    case BaselineConfig::Kind::acc_prox_grad: return solve_apg(p, cfg, opts);
  }
  throw std::invalid_argument("unknown baseline");
}

}  // namespace pmp
