#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "pmp/hawkes.hpp"
#include "pmp/rng.hpp"
#include "support/hawkes_oracle.hpp"

using namespace pmp;
using namespace pmp::testing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

EventSequence tiny() {
  EventSequence s;
  s.users = 2;
  s.horizon = 3.0;
  s.events = {{0, 1.0}, {1, 2.0}};
  return s;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("pmp_hawkes_" + name)).string();
}

}  // namespace

TEST_CASE("sufficient statistics on the two-event example") {
  const auto st = precompute_stats(tiny(), 1.0);
  CHECK_THAT(st.d[0], WithinRel(1.0 - std::exp(-2.0), 1e-15));
  CHECK_THAT(st.d[1], WithinRel(1.0 - std::exp(-1.0), 1e-15));
  REQUIRE(st.excitation.size() == 2);
  CHECK(st.excitation[0].empty());
  REQUIRE(st.excitation[1].size() == 1);
  CHECK(st.excitation[1][0].first == 0);
  CHECK_THAT(st.excitation[1][0].second, WithinRel(std::exp(-1.0), 1e-15));
}

TEST_CASE("degenerate sequences") {
  EventSequence empty;
  empty.users = 3;
  empty.horizon = 5.0;
  const auto st = precompute_stats(empty, 2.0);
  CHECK(st.d == Vector(3, 0.0));
  CHECK(st.excitation.empty());

  EventSequence one = empty;
  one.events = {{2, 1.5}};
  const auto so = precompute_stats(one, 2.0);
  CHECK_THAT(so.d[2], WithinRel(1.0 - std::exp(-2.0 * 3.5), 1e-15));
  CHECK(so.d[0] == 0.0);
  CHECK(so.excitation[0].empty());
}

TEST_CASE("recursive accumulation matches the double loop") {
  for (std::uint64_t seed : {1, 2, 3}) {
    const double c = 0.5 + seed;
    const auto s = random_sequence(seed, 4, 500, 200.0);
    const auto st = precompute_stats(s, c);
    const auto rows = naive_excitation(s, c);
    const auto d = naive_d(s, c);
    for (std::size_t u = 0; u < s.users; ++u) {
      CHECK_THAT(st.d[u], WithinRel(d[u], 1e-9));
      CHECK(st.d[u] <= static_cast<double>(std::count_if(s.events.begin(), s.events.end(),
                                                         [u](const Event& e) { return e.user == u; })));
    }
    for (std::size_t j = 0; j < s.events.size(); ++j) {
      CHECK(st.event_user[j] == s.events[j].user);
      Vector got(s.users, 0.0);
      for (const auto& [w, v] : st.excitation[j]) {
        CHECK(v > 0.0);
        got[w] = v;
      }
      for (std::size_t w = 0; w < s.users; ++w) {
        if (rows[j][w] < 1e-300) continue;
        CHECK_THAT(got[w], WithinRel(rows[j][w], 1e-9));
      }
    }
  }
}

TEST_CASE("assembled problem reproduces the likelihood") {
  SECTION("two-event example") {
    const auto np = assemble_network_problem(precompute_stats(tiny(), 1.0), 0.0);
    CHECK(np.problem.n() == 6);
    CHECK(np.problem.m() == 2);
    const Vector z{1.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    CHECK_THAT(objective(np.problem, z), WithinAbs(6.0, 1e-15));
  }
  SECTION("random instances") {
    for (std::uint64_t seed : {4, 5}) {
      const auto s = random_sequence(seed, 3, 60, 30.0);
      const double lambda = 0.7, c = 1.3;
      const auto np = assemble_network_problem(precompute_stats(s, c), lambda);
      CounterRng rng(seed + 100);
      Vector x(3), X(9);
      for (auto& v : x) v = rng.uniform(0.1, 1.0);
      for (auto& v : X) v = rng.uniform(0.0, 0.5);
      Vector z = x;
      z.insert(z.end(), X.begin(), X.end());
      CHECK_THAT(objective(np.problem, z), WithinRel(direct_likelihood(s, c, x, X, lambda), 1e-10));
      // each row touches its user's base rate and that user's row of X only
      const auto& a = np.problem.a();
      for (std::size_t r = 0; r < np.problem.m(); ++r) {
        const std::size_t u = s.events[np.event_of_row[r]].user;
        for (std::size_t k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
          const std::size_t col = a.col_idx()[k];
          const bool base = col == u;
          const bool own_row = col >= 3 + 3 * u && col < 3 + 3 * (u + 1);
          CHECK((base || own_row));
        }
      }
    }
  }
  SECTION("penalty-free optimum satisfies the mass identity") {
    const auto s = random_sequence(6, 2, 80, 40.0);
    const auto np = assemble_network_problem(precompute_stats(s, 1.0), 0.0);
    SolveOptions o;
    o.policy = StepsizePolicy::line_search();
    o.max_iters = 20000;
    o.report_every = 0;
    const auto rep = solve_cmp(np.problem, o);
    CHECK(mass_identity_residual(np.problem, rep.last_x) <= 1e-3 * 80.0);
  }
}

TEST_CASE("rows grouped by user and user blocks") {
  const auto s = random_sequence(7, 5, 300, 100.0);
  const auto np = assemble_network_problem(precompute_stats(s, 1.0), 1.0);
  REQUIRE(np.user_offsets.size() == 6);
  for (std::size_t u = 0; u < 5; ++u) {
    for (std::size_t r = np.user_offsets[u]; r < np.user_offsets[u + 1]; ++r) {
      CHECK(s.events[np.event_of_row[r]].user == u);
    }
  }
  for (std::size_t b : {1, 2, 3, 5, 9}) {
    const auto part = np.user_blocks(b);
    CHECK(part.count() <= b);
    CHECK(part.count() >= 1);
    for (auto off : part.offsets) {
      CHECK(std::find(np.user_offsets.begin(), np.user_offsets.end(), off) != np.user_offsets.end());
    }
  }
  CHECK(np.user_blocks(5).count() >= 4);
}

TEST_CASE("Hawkes simulation") {
  SECTION("no excitation gives Poisson counts") {
    const double mu = 0.5, T = 1e4;
    const auto s = simulate_hawkes(Vector(3, mu), Vector(9, 0.0), T, 1.0, 21);
    s.validate();
    for (std::size_t u = 0; u < 3; ++u) {
      const auto n = std::count_if(s.events.begin(), s.events.end(), [u](const Event& e) { return e.user == u; });
      CHECK(std::abs(static_cast<double>(n) - mu * T) <= 3.0 * std::sqrt(mu * T));
    }
  }
  SECTION("zero base rates give no events") {
    CHECK(simulate_hawkes(Vector(2, 0.0), Vector{0.2, 0.0, 0.0, 0.2}, 100.0, 1.0, 1).events.empty());
  }
  SECTION("a one-way link shows up at positive lag") {
    // user 1 is excited by user 0 only
    const auto s = simulate_hawkes(Vector{0.2, 0.05}, Vector{0.0, 0.0, 0.8, 0.0}, 5000.0, 2.0, 22);
    double after = 0.0, before = 0.0;
    const double window = 1.0;
    for (const auto& a : s.events) {
      if (a.user != 0) continue;
      for (const auto& b : s.events) {
        if (b.user != 1) continue;
        const double lag = b.time - a.time;
        if (lag > 0.0 && lag <= window) after += 1.0;
        if (lag < 0.0 && lag >= -window) before += 1.0;
      }
    }
    CHECK(after > 2.0 * before);
  }
  SECTION("same seed, same events") {
    const auto net = random_network(4, 3);
    const auto a = simulate_hawkes(net.base, net.infectivity, 500.0, 1.0, 9);
    const auto b = simulate_hawkes(net.base, net.infectivity, 500.0, 1.0, 9);
    REQUIRE(a.events.size() == b.events.size());
    for (std::size_t k = 0; k < a.events.size(); ++k) {
      CHECK(a.events[k].time == b.events[k].time);
      CHECK(a.events[k].user == b.events[k].user);
    }
    for (const auto& e : a.events) CHECK((e.time >= 0.0 && e.time <= 500.0));
  }
  SECTION("guards") {
    CHECK_THROWS_AS(simulate_hawkes(Vector(2, 0.1), Vector{0.6, 0.5, 0.0, 0.1}, 10.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(simulate_hawkes(Vector(1, 100.0), Vector(1, 0.0), 100.0, 1.0, 1, 1000), ExplosionGuard);
  }
  SECTION("random networks are subcritical") {
    const auto net = random_network(6, 4, 0.1, 0.4, 0.6);
    for (std::size_t u = 0; u < 6; ++u) {
      double row = 0.0;
      for (std::size_t w = 0; w < 6; ++w) row += net.infectivity[u * 6 + w];
      CHECK_THAT(row, WithinAbs(0.6, 1e-12));
      CHECK(net.infectivity[u * 6 + u] > 0.0);
    }
  }
}

TEST_CASE("event files") {
  const auto path = temp_path("events.txt");
  auto s = random_sequence(8, 3, 40, 10.0);
  write_events(path, s);
  const auto r = read_events(path);
  CHECK(r.users == 3);
  CHECK(r.horizon == 10.0);
  REQUIRE(r.events.size() == 40);
  for (std::size_t k = 0; k < 40; ++k) {
    CHECK(r.events[k].time == s.events[k].time);
    CHECK(r.events[k].user == s.events[k].user);
  }
  {
    std::ofstream out(path);
    out << "2 5\n0,1.0\n1,2.5\n0,7.0\n";
  }
  set_warnings_enabled(false);
  CHECK(read_events(path).events.size() == 2);
  set_warnings_enabled(true);
  {
    std::ofstream out(path);
    out << "2 5\n0,1.0\n3,2.5\n";
  }
  CHECK_THROWS_AS(read_events(path), ParseError);
  {
    std::ofstream out(path);
    out << "2 5\n0,2.0\n1,1.5\n";
  }
  CHECK_THROWS_AS(read_events(path), ParseError);
  {
    std::ofstream out(path);
    out << "2 5\n0;2.0\n";
  }
  CHECK_THROWS_AS(read_events(path), ParseError);
  std::filesystem::remove(path);
}

TEST_CASE("estimate files") {
  const auto base = temp_path("base.csv"), inf = temp_path("inf.csv");
  write_base_csv(base, {0.5, 0.25});
  write_infectivity_csv(inf, {0.1, 0.2, 0.3, 0.4}, 2);
  std::ifstream b(base), i(inf);
  std::string l1, l2;
  std::getline(b, l1);
  std::getline(b, l2);
  CHECK(l1 == "0.5");
  CHECK(l2 == "0.25");
  std::getline(i, l1);
  std::getline(i, l2);
  CHECK(l1 == "0.1,0.2");
  CHECK(l2 == "0.3,0.4");
  CHECK_THROWS_AS(write_infectivity_csv(inf, {0.1}, 2), DimensionError);
  std::filesystem::remove(base);
  std::filesystem::remove(inf);
}

TEST_CASE("network estimation") {
  SECTION("relative suboptimality drops tenfold on a simulated network") {
    const auto net = random_network(5, 11, 0.2);
    const auto s = simulate_hawkes(net.base, net.infectivity, 500.0, 1.0, 12);
    REQUIRE(s.events.size() > 100);
    const auto np = assemble_network_problem(precompute_stats(s, 1.0), 1.0);

    NetworkOptions o;
    o.solve.policy = StepsizePolicy::line_search(0.0, 10.0);
    o.solve.pass_budget = 1000.0;
    o.solve.max_iters = 100000;
    o.solve.report_every = 10;
    const std::vector<double> grid{1, 10, 100, 1000};
    o.solve.alpha = tune_alpha(np.problem, grid, o.solve, TuneScore::area);

    NetworkOptions ref = o;
    ref.solve.pass_budget.reset();
    ref.solve.max_iters = 20000;
    ref.solve.report_every = 0;
    const auto best = estimate_network(np, ref);
    o.solve.f_star = std::min(objective(np.problem, best.report.final_x), objective(np.problem, best.report.last_x));

    const auto est = estimate_network(np, o);
    REQUIRE(est.report.history.front().rel_subopt);
    CHECK(*est.report.history.back().rel_subopt <= 0.1 * *est.report.history.front().rel_subopt);
    for (double v : est.base) CHECK(v > 0.0);
    for (double v : est.infectivity) CHECK(v > 0.0);
  }
  SECTION("single user without penalty recovers the Poisson rate") {
    const double mu = 0.3, T = 5000.0;
    const auto s = simulate_hawkes(Vector{mu}, Vector{0.0}, T, 1.0, 13);
    NetworkOptions o;
    o.solve.policy = StepsizePolicy::line_search();
    o.solve.max_iters = 20000;
    o.solve.report_every = 0;
    const auto stats = precompute_stats(s, 1.0);
    const auto np = assemble_network_problem(stats, 0.0);
    const auto est = estimate_network(np, o);
    // X_11 is free, so the base rate alone need not be N / T; the fitted
    // compensator must still integrate to N, and (N / T, 0) is feasible.
    const double n = static_cast<double>(s.events.size());
    CHECK_THAT(est.base[0] * T + est.infectivity[0] * stats.d[0], WithinRel(n, 1e-3));
    const double f = objective(np.problem, Vector{est.base[0], est.infectivity[0]});
    CHECK(f <= objective(np.problem, Vector{n / T, 0.0}) + 1e-6 * std::abs(f));
    CHECK(est.base[0] > 0.5 * n / T);
  }
  SECTION("the randomized solver runs on user blocks") {
    const auto net = random_network(4, 14);
    const auto s = simulate_hawkes(net.base, net.infectivity, 1000.0, 1.0, 15);
    NetworkOptions o;
    o.solver = NetworkSolver::rb_cmp;
    o.blocks = 3;
    o.solve.max_iters = 200;
    const auto est = estimate_network(s, 0.5, o);
    CHECK(est.report.solver == "rb-cmp");
    CHECK(est.report.diagnostics.block_counts.size() <= 3);
    CHECK(est.infectivity.size() == 16);
  }
}
