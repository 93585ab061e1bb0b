#include "pmp/cmp.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "detail/driver.hpp"
#include "pmp/kernels.hpp"

namespace pmp {

namespace {

double sq_dist(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

kernels::CsrView csr(const SparseMatrix& a) { return {a.row_ptr(), a.col_idx(), a.values()}; }

void check_positive(const Vector& v, bool strict, const char* what) {
  for (double e : v) {
    if (strict ? !(e > 0.0) : !(e >= 0.0)) throw DomainError(std::string("iterate left the domain: ") + what);
  }
}

}  // namespace

Vector SaddleState::average_x() const {
  Vector out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = (sum_x[j] + (weight_sum - x_mark) * x[j]) / weight_sum;
  return out;
}

Vector SaddleState::average_y() const {
  Vector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = (sum_y[i] + (weight_sum - y_mark[i]) * y[i]) / weight_sum;
  return out;
}

SaddleState initial_state(const PoissonProblem& p, const std::optional<Vector>& x0) {
  SaddleState st;
  if (x0) {
    if (x0->size() != p.n()) throw DimensionError("start point has the wrong length");
    st.x = *x0;
    check_positive(st.x, p.setup().kind == SetupKind::entropy, "start point");
  } else {
    st.x = shell_initial_point(p);
  }
  Vector ax(p.m());
  p.a().multiply(st.x, ax);
  st.y.resize(p.m());
  for (std::size_t i = 0; i < p.m(); ++i) {
    if (!(ax[i] > 0.0)) throw DomainError("start point has a_i^T x <= 0 at row " + std::to_string(i));
    st.y[i] = p.c()[i] / ax[i];
  }
  st.x_hat = st.x;
  st.y_hat = st.y;
  st.aty.assign(p.n(), 0.0);
  p.a().multiply_transpose(st.y, st.aty);
  st.sum_x.assign(p.n(), 0.0);
  st.sum_y.assign(p.m(), 0.0);
  st.y_mark.assign(p.m(), 0.0);
  return st;
}

double resolve_alpha(const SolveOptions& opts) {
  double a = 1.0;
  if (opts.alpha) {
    a = *opts.alpha;
  } else if (opts.theta_x && opts.theta_y) {
    a = *opts.theta_y / *opts.theta_x;
  }
  if (!(a > 0.0) || !std::isfinite(a)) throw std::invalid_argument("alpha must be positive and finite");
  return a;
}

void compute_block_step(const PoissonProblem& p, const SaddleState& st, double gamma, double alpha,
                        BlockStep& step) {
  const std::size_t n = p.n(), m = p.m();
  const std::size_t r0 = step.r0, r1 = step.r1, len = r1 - r0;
  const auto& setup = p.setup();
  const auto pen = p.penalty().weights();
  const auto cb = std::span<const double>(p.c()).subspan(r0, len);
  const auto yb = std::span<const double>(st.y).subspan(r0, len);
  const auto a = csr(p.a());

  step.x_hat.resize(n);
  step.x_next.resize(n);
  step.y_hat.resize(len);
  step.y_next.resize(len);
  step.ax.resize(len);
  step.ax_hat.resize(len);
  step.clamps = 0;

  Vector xi(step.primal ? n : 0);
  if (step.primal) {
    for (std::size_t j = 0; j < n; ++j) xi[j] = gamma * (p.s()[j] - st.aty[j]);
    step.clamps += primal_prox(setup, st.x, xi, pen, gamma, alpha, step.x_hat);
  } else {
    step.x_hat = st.x;
  }
  kernels::parallel::gather_rows(a, r0, r1, st.x, step.ax);
  kernels::parallel::dual_update(yb, step.ax, cb, gamma, step.y_hat);

  if (step.primal) {
    step.aty_hat.resize(n);
    if (r0 == 0 && r1 == m) {
      p.a().multiply_transpose(step.y_hat, step.aty_hat);
    } else {
      step.aty_hat = st.aty;
      Vector delta(len);
      for (std::size_t i = 0; i < len; ++i) delta[i] = step.y_hat[i] - yb[i];
      p.a().add_transpose_rows(r0, r1, delta, step.aty_hat);
    }
    for (std::size_t j = 0; j < n; ++j) xi[j] = gamma * (p.s()[j] - step.aty_hat[j]);
    step.clamps += primal_prox(setup, st.x, xi, pen, gamma, alpha, step.x_next);
    kernels::parallel::gather_rows(a, r0, r1, step.x_hat, step.ax_hat);
  } else {
    step.x_next = st.x;
    step.ax_hat = step.ax;
  }
  kernels::parallel::dual_update(yb, step.ax_hat, cb, gamma, step.y_next);

  const bool strict = setup.kind == SetupKind::entropy;
  check_positive(step.x_hat, strict, "x_hat");
  check_positive(step.x_next, strict, "x");
  check_positive(step.y_hat, true, "y_hat");
  check_positive(step.y_next, true, "y");
}

SigmaParts step_sigma(const PoissonProblem& p, const SaddleState& st, const BlockStep& step,
                      double gamma, double alpha) {
  const std::size_t len = step.r1 - step.r0;
  const auto yb = std::span<const double>(st.y).subspan(step.r0, len);
  SigmaParts s;
  double coupling = 0.0;
  if (step.primal) {
    // F_x(u_hat) - F_x(u) = -(A^T y_hat - A^T y)
    for (std::size_t j = 0; j < p.n(); ++j) {
      coupling -= (step.aty_hat[j] - st.aty[j]) * (step.x_hat[j] - step.x_next[j]);
    }
    // F_y(u_hat) - F_y(u) = A_B (x_hat - x)
    for (std::size_t i = 0; i < len; ++i) {
      coupling += (step.ax_hat[i] - step.ax[i]) * (step.y_hat[i] - step.y_next[i]);
    }
  }
  s.coupling = gamma * coupling;
  double breg = 0.5 * (sq_dist(step.y_next, step.y_hat) + sq_dist(step.y_hat, yb));
  if (step.primal) {
    breg += alpha * (bregman(p.setup(), step.x_next, step.x_hat) + bregman(p.setup(), step.x_hat, st.x));
  }
  s.bregman = breg;
  double scale = 0.0;
  for (double v : step.y_hat) scale += v * v;
  if (step.primal) {
    // rounding a coordinate by eps * v moves KL by ~eps^2 v, squared distance by eps^2 v^2
    const bool entropy = p.setup().kind == SetupKind::entropy;
    for (double v : step.x_hat) scale += alpha * (entropy ? v : v * v);
  }
  const double eps = std::numeric_limits<double>::epsilon();
  s.noise = 16.0 * eps * eps * scale;
  return s;
}

void commit_block_step(const PoissonProblem& p, SaddleState& st, BlockStep& step, double gamma,
                       bool exact_aty) {
  const double w_old = st.weight_sum;
  const double w_new = w_old + gamma;
  const std::size_t len = step.r1 - step.r0;
  if (step.primal) {
    for (std::size_t j = 0; j < p.n(); ++j) {
      st.sum_x[j] += (w_old - st.x_mark) * st.x[j] + gamma * step.x_hat[j];
    }
    st.x_mark = w_new;
    st.x.swap(step.x_next);
    st.x_hat.swap(step.x_hat);
  }
  Vector delta(exact_aty ? 0 : len);
  for (std::size_t k = 0; k < len; ++k) {
    const std::size_t i = step.r0 + k;
    st.sum_y[i] += (w_old - st.y_mark[i]) * st.y[i] + gamma * step.y_hat[k];
    st.y_mark[i] = w_new;
    if (!exact_aty) delta[k] = step.y_next[k] - st.y[i];
    st.y[i] = step.y_next[k];
    st.y_hat[i] = step.y_hat[k];
  }
  if (exact_aty) {
    p.a().multiply_transpose(st.y, st.aty);
  } else {
    p.a().add_transpose_rows(step.r0, step.r1, delta, st.aty);
  }
  st.weight_sum = w_new;
  ++st.iteration;
}

void cmp_step(const PoissonProblem& p, SaddleState& state, double gamma, double alpha) {
  BlockStep step;
  step.r1 = p.m();
  compute_block_step(p, state, gamma, alpha, step);
  commit_block_step(p, state, step, gamma, true);
}

LineSearchDecision line_search_accept(const PoissonProblem& p, const SaddleState& state,
                                      const BlockStep& step, double gamma, double alpha) {
  return step_sigma(p, state, step, gamma, alpha).nonpositive() ? LineSearchDecision::accept
                                                                 : LineSearchDecision::shrink;
}

double theory_stepsize(const PoissonProblem& p, double alpha) {
  const double l = operator_norm(p);
  if (!std::isfinite(l)) {
    throw std::invalid_argument("theory stepsize needs a mass bound on every entropy block");
  }
  return l > 0.0 ? std::sqrt(alpha) / l : 1.0;
}

SolveReport solve_cmp(const PoissonProblem& p, const SolveOptions& opts) {
  detail::DriverConfig cfg;
  cfg.solver = "cmp";
  if (opts.policy.kind != StepsizePolicy::Kind::constant) cfg.lipschitz = operator_norm(p);
  const double passes = 1.0;
  const std::size_t m = p.m();
  return detail::run_mirror_prox(p, opts, cfg, [m, passes](std::size_t) {
    return detail::BlockChoice{true, 0, m, 0, passes};
  });
}

double tune_alpha(const PoissonProblem& p, std::span<const double> grid, const SolveOptions& opts,
                  TuneScore score) {
  if (grid.empty()) throw std::invalid_argument("empty alpha grid");
  SolveOptions o = opts;
  o.report_every = score == TuneScore::area ? 1 : 0;
  o.f_star.reset();
  o.observer = nullptr;
  double best = grid.front(), best_score = std::numeric_limits<double>::infinity();
  for (double a : grid) {
    o.alpha = a;
    double v = std::numeric_limits<double>::infinity();
    try {
      v = tuning_score(solve_cmp(p, o).history, score, o.pass_budget);
    } catch (const StallError&) {
    }
    if (v < best_score) {
      best_score = v;
      best = a;
    }
  }
  return best;
}

namespace detail {

namespace {

using Clock = std::chrono::steady_clock;

HistoryRow history_row(const PoissonProblem& p, const SaddleState& st, double passes, double ms) {
  HistoryRow r;
  r.iteration = st.iteration;
  r.passes = passes;
  const Vector x = st.average_defined() ? st.average_x() : st.x;
  r.objective = objective_or_inf(p, x);
  r.mass_residual = mass_identity_residual(p, x);
  r.elapsed_ms = ms;
  return r;
}

}  // namespace

SolveReport run_mirror_prox(const PoissonProblem& p, const SolveOptions& opts,
                            const DriverConfig& cfg, const BlockChooser& choose) {
  const double alpha = resolve_alpha(opts);
  const auto& pol = opts.policy;
  SolveReport rep;
  rep.solver = cfg.solver;
  rep.diagnostics.alpha = alpha;
  rep.diagnostics.lipschitz = cfg.lipschitz;
  rep.diagnostics.block_counts.assign(cfg.block_count, 0);

  double gamma_theory = 1.0;
  if (pol.kind != StepsizePolicy::Kind::constant) {
    if (cfg.lipschitz > 0.0 && std::isfinite(cfg.lipschitz)) {
      gamma_theory = pol.safety * std::sqrt(alpha) / cfg.lipschitz;
    } else if (pol.kind == StepsizePolicy::Kind::theory && !std::isfinite(cfg.lipschitz)) {
      throw std::invalid_argument("theory stepsize needs a mass bound on every entropy block");
    }
  }
  double gamma = 0.0;
  switch (pol.kind) {
    case StepsizePolicy::Kind::constant: gamma = pol.gamma; break;
    case StepsizePolicy::Kind::theory: gamma = gamma_theory; break;
    case StepsizePolicy::Kind::line_search:
      gamma = pol.gamma > 0.0 ? pol.gamma : pol.initial_scale * gamma_theory;
      break;
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("stepsize must be positive");

  SaddleState st = initial_state(p, opts.x0);
  const bool line_search = pol.kind == StepsizePolicy::Kind::line_search;
  const bool want_sigma = line_search || opts.track_sigma;
  auto& diag = rep.diagnostics;

  double passes = 0.0;
  double elapsed = 0.0;
  rep.history.push_back(history_row(p, st, 0.0, 0.0));

  BlockStep step;
  Vector exact_aty;
  for (std::size_t t = 0; t < opts.max_iters; ++t) {
    if (opts.pass_budget && passes >= *opts.pass_budget) break;
    const auto t0 = Clock::now();
    const BlockChoice ch = choose(t);
    step.primal = ch.primal;
    step.r0 = ch.r0;
    step.r1 = ch.r1;
    ++diag.block_counts.at(ch.index);

    double sigma = std::numeric_limits<double>::quiet_NaN();
    std::size_t consecutive = 0;
    passes += ch.passes_per_eval;  // F at the current point
    for (;;) {
      SigmaParts sp;
      bool in_domain = true;
      try {
        compute_block_step(p, st, gamma, alpha, step);
      } catch (const DomainError&) {
        // an overflowing trial is just another rejection for the line search
        if (!line_search) throw;
        in_domain = false;
      }
      passes += ch.passes_per_eval;
      if (in_domain) {
        diag.clamp_events += step.clamps;
        if (!want_sigma) break;
        sp = step_sigma(p, st, step, gamma, alpha);
        sigma = sp.sigma();
      }
      if (!line_search) {
        ++diag.sigma_checks;
        diag.max_sigma = std::max(diag.max_sigma, sigma);
        if (!sp.nonpositive()) ++diag.sigma_violations;
        break;
      }
      if (in_domain && sp.nonpositive()) break;
      ++diag.shrinks;
      if (++consecutive >= pol.max_shrinks) {
        throw StallError("line search: " + std::to_string(consecutive) + " consecutive shrinks at iteration " +
                         std::to_string(t + 1));
      }
      gamma *= pol.shrink;
    }
    const double used = gamma;
    const bool full = ch.r0 == 0 && ch.r1 == p.m();
    commit_block_step(p, st, step, used, !cfg.incremental_aty || full);
    if (cfg.incremental_aty && opts.refresh_every > 0 && st.iteration % opts.refresh_every == 0) {
      exact_aty.assign(p.n(), 0.0);
      p.a().multiply_transpose(st.y, exact_aty);
      double drift = 0.0;
      for (std::size_t j = 0; j < p.n(); ++j) drift = std::max(drift, std::abs(exact_aty[j] - st.aty[j]));
      diag.max_cache_drift = std::max(diag.max_cache_drift, drift);
      st.aty.swap(exact_aty);
    }
    if (line_search) gamma *= pol.grow;
    elapsed += std::chrono::duration<double, std::milli>(Clock::now() - t0).count();

    if (opts.observer) opts.observer(IterationInfo{st.iteration, used, sigma, st});
    const bool last = t + 1 == opts.max_iters;
    if ((opts.report_every > 0 && st.iteration % opts.report_every == 0) || last) {
      rep.history.push_back(history_row(p, st, passes, elapsed));
    }
  }
  if (rep.history.back().iteration != st.iteration) rep.history.push_back(history_row(p, st, passes, elapsed));

  if (opts.f_star) fill_relative_suboptimality(rep.history, *opts.f_star);
  rep.average_defined = st.average_defined();
  rep.weight_sum = st.weight_sum;
  rep.final_x = st.average_defined() ? st.average_x() : st.x;
  rep.final_y = st.average_defined() ? st.average_y() : st.y;
  rep.last_x = st.x;
  rep.passes = passes;
  if (opts.theta_x && opts.theta_y && st.average_defined()) {
    diag.theory_bound = (alpha * *opts.theta_x + *opts.theta_y) / st.weight_sum;
  }
  return rep;
}

}  // namespace detail

}  // namespace pmp
