#include <catch_amalgamated.hpp>

#include <cmath>

#include "pmp/cmp.hpp"
#include "pmp/kernels.hpp"
#include "support/instances.hpp"

using namespace pmp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

SolveOptions opts(StepsizePolicy pol, std::size_t iters, std::size_t every = 1) {
  SolveOptions o;
  o.policy = pol;
  o.max_iters = iters;
  o.report_every = every;
  return o;
}

double root(double eta, double bc) { return 0.5 * (-eta + std::sqrt(eta * eta + 4.0 * bc)); }

}  // namespace

TEST_CASE("single step replays the four scalar updates") {
  // uncapped entropy on the 1-D instance from an off-optimal point
  const auto p = testing::unit_instance(ProximalSetup::entropy());
  auto st = initial_state(p, Vector{0.4});
  REQUIRE_THAT(st.y[0], WithinRel(2.5, 1e-15));
  st.y[0] = 1.7;
  st.aty[0] = 1.7;
  const double gamma = 0.3, alpha = 1.3;
  const double x = 0.4, y = 1.7;
  const double x_hat = x * std::exp(-gamma * (1.0 - y) / alpha);
  const double y_hat = root(gamma * x - y, gamma);
  const double x_next = x * std::exp(-gamma * (1.0 - y_hat) / alpha);
  const double y_next = root(gamma * x_hat - y, gamma);
  cmp_step(p, st, gamma, alpha);
  CHECK_THAT(st.x_hat[0], WithinRel(x_hat, 1e-14));
  CHECK_THAT(st.y_hat[0], WithinRel(y_hat, 1e-14));
  CHECK_THAT(st.x[0], WithinRel(x_next, 1e-14));
  CHECK_THAT(st.y[0], WithinRel(y_next, 1e-14));
  CHECK_THAT(st.average_x()[0], WithinRel(x_hat, 1e-14));
}

TEST_CASE("the optimum is a fixed point of the step") {
  SECTION("1-D instance") {
    const auto p = testing::unit_instance();
    for (double gamma : {1e-3, 0.5, 7.0}) {
      auto st = initial_state(p, Vector{1.0});
      cmp_step(p, st, gamma, 1.0);
      CHECK_THAT(st.x[0], WithinAbs(1.0, 1e-12));
      CHECK_THAT(st.y[0], WithinAbs(1.0, 1e-12));
    }
  }
  SECTION("small random instance solved to high accuracy") {
    const auto p = testing::random_instance(3, 0.0, 3, 8);
    auto o = opts(StepsizePolicy::line_search(), 200000, 0);
    const auto rep = solve_cmp(p, o);
    const auto x_star = rep.last_x;
    auto st = initial_state(p, x_star);
    const Vector y_star = st.y;
    cmp_step(p, st, 0.05, 1.0);
    for (std::size_t j = 0; j < p.n(); ++j) CHECK_THAT(st.x[j], WithinAbs(x_star[j], 1e-9));
    for (std::size_t i = 0; i < p.m(); ++i) CHECK_THAT(st.y[i], WithinAbs(y_star[i], 1e-9));
  }
}

TEST_CASE("vanishing stepsize leaves the iterate in place") {
  const auto p = testing::random_instance(4, 0.2, 6, 20);
  auto st = initial_state(p);
  const auto x = st.x, y = st.y;
  cmp_step(p, st, 1e-12, 1.0);
  for (std::size_t j = 0; j < p.n(); ++j) CHECK_THAT(st.x[j], WithinRel(x[j], 1e-9));
  for (std::size_t i = 0; i < p.m(); ++i) CHECK_THAT(st.y[i], WithinRel(y[i], 1e-9));
}

TEST_CASE("1-D instance converges with the theory stepsize") {
  const auto p = testing::unit_instance(ProximalSetup::entropy());
  auto o = opts(StepsizePolicy::theory(), 10000, 100);
  o.x0 = Vector{0.2};
  const auto rep = solve_cmp(p, o);
  CHECK(objective(p, rep.final_x) - 1.0 <= 1e-4);
  CHECK(rep.average_defined);
}

TEST_CASE("zero iterations echo the start point") {
  const auto p = testing::random_instance(5, 0.0);
  const auto rep = solve_cmp(p, opts(StepsizePolicy::theory(), 0));
  CHECK(rep.history.size() == 1);
  CHECK(rep.history[0].iteration == 0);
  CHECK_FALSE(rep.average_defined);
  CHECK(rep.final_x == shell_initial_point(p));
}

TEST_CASE("history is ordered and counts two passes per accepted step") {
  const auto p = testing::random_instance(6, 0.1);
  const auto rep = solve_cmp(p, opts(StepsizePolicy::theory(), 50, 7));
  for (std::size_t k = 1; k < rep.history.size(); ++k) {
    CHECK(rep.history[k].iteration > rep.history[k - 1].iteration);
    CHECK(rep.history[k].passes >= rep.history[k - 1].passes);
  }
  CHECK(rep.history.back().iteration == 50);
  CHECK(rep.passes == 100.0);
}

TEST_CASE("ergodic averages match a from-scratch recomputation") {
  const auto p = testing::random_instance(7, 0.1, 10, 40);
  auto o = opts(StepsizePolicy::line_search(), 300, 0);
  Vector sx(p.n(), 0.0), sy(p.m(), 0.0);
  double w = 0.0;
  o.observer = [&](const IterationInfo& info) {
    for (std::size_t j = 0; j < p.n(); ++j) sx[j] += info.gamma * info.state.x_hat[j];
    for (std::size_t i = 0; i < p.m(); ++i) sy[i] += info.gamma * info.state.y_hat[i];
    w += info.gamma;
  };
  const auto rep = solve_cmp(p, o);
  CHECK_THAT(rep.weight_sum, WithinRel(w, 1e-12));
  for (std::size_t j = 0; j < p.n(); ++j) CHECK_THAT(rep.final_x[j], WithinRel(sx[j] / w, 1e-12));
  for (std::size_t i = 0; i < p.m(); ++i) CHECK_THAT(rep.final_y[i], WithinRel(sy[i] / w, 1e-12));
}

TEST_CASE("iterates stay strictly positive") {
  const auto p = testing::random_instance(8, 0.5);
  auto o = opts(StepsizePolicy::line_search(), 2000, 0);
  bool positive = true;
  o.observer = [&](const IterationInfo& info) {
    for (double v : info.state.x) positive = positive && v > 0.0;
    for (double v : info.state.y) positive = positive && v > 0.0;
  };
  const auto rep = solve_cmp(p, o);
  CHECK(positive);
  for (double v : rep.final_x) CHECK(v > 0.0);
}

TEST_CASE("theory stepsize keeps sigma nonpositive") {
  for (std::uint64_t seed : {10, 11, 12}) {
    const auto p = testing::random_instance(seed, seed % 2 ? 0.1 : 0.0);
    auto o = opts(StepsizePolicy::theory(), 1000, 0);
    o.track_sigma = true;
    const auto rep = solve_cmp(p, o);
    CHECK(rep.diagnostics.sigma_checks == 1000);
    CHECK(rep.diagnostics.sigma_violations == 0);
  }
}

TEST_CASE("sigma check tolerates roundoff after convergence") {
  // this instance reaches machine precision within 1e4 steps; from then on
  // both sigma terms are ~1e-31 noise
  const auto p = testing::random_instance(1001, 0.0);
  auto o = opts(StepsizePolicy::theory(), 10000, 0);
  o.track_sigma = true;
  const auto rep = solve_cmp(p, o);
  CHECK(rep.diagnostics.sigma_violations == 0);

  SigmaParts tiny{1.4e-31, 1.3e-31};
  CHECK_FALSE(tiny.nonpositive());
  tiny.noise = 1e-29;
  CHECK(tiny.nonpositive());
  CHECK_FALSE(SigmaParts{1.0, 0.5, 1e-29}.nonpositive());
  CHECK_FALSE(SigmaParts{std::nan(""), 1.0}.nonpositive());
}

TEST_CASE("line search") {
  SECTION("accepts the theory stepsize") {
    const auto p = testing::random_instance(13, 0.0);
    const double alpha = 1.0;
    const double gamma = theory_stepsize(p, alpha);
    auto st = initial_state(p);
    for (int k = 0; k < 1000; ++k) {
      BlockStep step;
      step.r1 = p.m();
      compute_block_step(p, st, gamma, alpha, step);
      REQUIRE(line_search_accept(p, st, step, gamma, alpha) == LineSearchDecision::accept);
      commit_block_step(p, st, step, gamma, true);
    }
  }
  SECTION("shrinks an oversized trial") {
    const auto p = testing::random_instance(14, 0.0);
    const double gamma = 1e3 * theory_stepsize(p, 1.0);
    const auto rep = solve_cmp(p, opts(StepsizePolicy::line_search(gamma), 20, 0));
    CHECK(rep.diagnostics.shrinks >= 1);
  }
  SECTION("constant operator accepts every stepsize") {
    // no observations: F = (s, .) does not depend on the point
    const auto p = PoissonProblem::assemble({1.0, 2.0}, {}, SparseMatrix::from_triplets(0, 2, {}),
                                            PenaltySpec::none(), ProximalSetup::entropy());
    const auto st = initial_state(p, Vector{1.0, 1.0});
    for (double gamma : {1e-3, 1.0, 1e3}) {
      BlockStep step;
      compute_block_step(p, st, gamma, 1.0, step);
      CHECK(line_search_accept(p, st, step, gamma, 1.0) == LineSearchDecision::accept);
      CHECK(step_sigma(p, st, step, gamma, 1.0).coupling == 0.0);
    }
  }
  SECTION("gives up after repeated shrinks") {
    const auto p = testing::random_instance(15, 0.0);
    auto pol = StepsizePolicy::line_search(1e250);
    CHECK_THROWS_AS(solve_cmp(p, opts(pol, 5, 0)), StallError);
  }
}

TEST_CASE("theory stepsize requires a mass bound") {
  const auto a = SparseMatrix::from_triplets(1, 2, {{0, 0, 1.0}, {0, 1, 1.0}});
  const auto p = PoissonProblem::assemble({1.0, 1.0}, {1.0}, a, PenaltySpec::none(), ProximalSetup::entropy());
  CHECK(std::isfinite(operator_norm(p)));
  // s_1 = 0 leaves the mass of x_1 unbounded
  const auto q = PoissonProblem::assemble({1.0, 0.0}, {1.0}, a, PenaltySpec::none(), ProximalSetup::entropy());
  CHECK(std::isinf(operator_norm(q)));
  CHECK_THROWS_AS(theory_stepsize(q, 1.0), std::invalid_argument);
}

TEST_CASE("mass identity and rate on random instances") {
  for (std::uint64_t seed : {20, 21}) {
    const auto p = testing::random_instance(seed, seed % 2 ? 0.1 : 0.0);
    auto ref = solve_cmp(p, opts(StepsizePolicy::line_search(), 100000, 0));
    const double f_star = std::min(objective(p, ref.final_x), objective(p, ref.last_x));
    const auto rep = solve_cmp(p, opts(StepsizePolicy::theory(), 10000, 100));
    const double e2 = rep.history[1].objective - f_star;
    const double e4 = rep.history.back().objective - f_star;
    REQUIRE(e2 > 0.0);
    REQUIRE(e4 > 0.0);
    CHECK(std::log10(e4 / e2) / 2.0 <= -0.8);
    CHECK(mass_identity_residual(p, rep.final_x) <= 1e-3 * p.total_count());
  }
}

TEST_CASE("alpha from bounding-set radii") {
  SolveOptions o;
  CHECK(resolve_alpha(o) == 1.0);
  o.theta_x = 2.0;
  o.theta_y = 8.0;
  CHECK(resolve_alpha(o) == 4.0);
  o.alpha = 0.5;
  CHECK(resolve_alpha(o) == 0.5);
  o.alpha = -1.0;
  CHECK_THROWS(resolve_alpha(o));

  const auto p = testing::random_instance(22, 0.0);
  SolveOptions b = opts(StepsizePolicy::theory(), 10, 0);
  b.theta_x = 1.0;
  b.theta_y = 1.0;
  const auto rep = solve_cmp(p, b);
  REQUIRE(rep.diagnostics.theory_bound);
  CHECK_THAT(*rep.diagnostics.theory_bound, WithinRel(2.0 / rep.weight_sum, 1e-14));
}
