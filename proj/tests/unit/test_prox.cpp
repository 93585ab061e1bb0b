#include <catch_amalgamated.hpp>

#include <cmath>
#include <functional>

#include "pmp/prox.hpp"
#include "pmp/rng.hpp"

using namespace pmp;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

// Golden-section minimization of a unimodal function on [lo, hi]. Comparing
// function values near the minimum limits the argmin to about sqrt(eps).
double golden_min(const std::function<double(double)>& f, double lo, double hi, int iters = 200) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int k = 0; k < iters; ++k) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

double l1(std::span<const double> v) {
  double s = 0.0;
  for (double e : v) s += std::abs(e);
  return s;
}

}  // namespace

TEST_CASE("log-barrier prox examples") {
  const Vector c{1.0};
  CHECK_THAT(prox_log_barrier(Vector{0.0}, 1.0, c)[0], WithinAbs(1.0, 1e-15));
  // numeric minimization of 1/2 y^2 + eta y - log y
  for (double eta : {3.0, -2.0}) {
    const double oracle = golden_min([&](double y) { return 0.5 * y * y + eta * y - std::log(y); }, 1e-9, 10.0);
    CHECK_THAT(prox_log_barrier(Vector{eta}, 1.0, c)[0], WithinAbs(oracle, 1e-6));
  }
  CHECK_THAT(prox_log_barrier(Vector{3.0}, 1.0, c)[0], WithinAbs(0.302776, 1e-6));
  CHECK_THAT(prox_log_barrier(Vector{-2.0}, 1.0, c)[0], WithinAbs(2.414214, 1e-6));
}

TEST_CASE("log-barrier prox solves its stationarity equation") {
  CounterRng rng(101);
  for (int k = 0; k < 100000; ++k) {
    const double eta = std::sinh(rng.uniform(-20.0, 20.0));
    const double beta = std::exp(rng.uniform(-15.0, 15.0));
    const double ci = std::exp(rng.uniform(-5.0, 8.0));
    const double y = prox_log_barrier(Vector{eta}, beta, Vector{ci})[0];
    REQUIRE(y > 0.0);
    const double scale = std::max({y * y, std::abs(eta * y), beta * ci});
    REQUIRE(std::abs(y * y + eta * y - beta * ci) <= 1e-10 * scale);
  }
}

TEST_CASE("log-barrier prox is nonincreasing in eta") {
  CounterRng rng(102);
  for (int k = 0; k < 10000; ++k) {
    const double beta = std::exp(rng.uniform(-5.0, 5.0));
    const double e1 = rng.uniform(-50.0, 50.0), e2 = e1 + std::exp(rng.uniform(-10.0, 3.0));
    const auto y = prox_log_barrier(Vector{e1, e2}, beta, Vector{1.0, 1.0});
    CHECK(y[1] <= y[0]);
  }
}

TEST_CASE("entropy prox examples") {
  const Vector half{0.5, 0.5};
  CHECK(prox_entropy_capped(half, Vector{0.0, 0.0}, 1.0, {}) == half);

  const double alpha = 0.7;
  const auto x = prox_entropy_capped(half, Vector{alpha * std::log(2.0), 0.0}, alpha, {});
  // coordinatewise numeric minimization of alpha * KL(x, x0) + xi x
  for (std::size_t j = 0; j < 2; ++j) {
    const double xi = j == 0 ? alpha * std::log(2.0) : 0.0;
    const double oracle = golden_min(
        [&](double v) { return alpha * (v * std::log(v / 0.5) - v + 0.5) + xi * v; }, 1e-9, 5.0);
    CHECK_THAT(x[j], WithinAbs(oracle, 1e-6));
  }
  CHECK_THAT(x[0], WithinRel(0.25, 1e-14));
  CHECK_THAT(x[1], WithinRel(0.5, 1e-14));

  const auto y = prox_entropy_capped(Vector{1.0, 1.0}, Vector{0.0, 0.0}, 1.0, {}, MassRule{std::nullopt, 1.0});
  CHECK_THAT(y[0], WithinRel(0.5, 1e-15));
  CHECK_THAT(y[1], WithinRel(0.5, 1e-15));
  CHECK_THROWS_AS(prox_entropy_capped(Vector{0.0, 1.0}, Vector{0.0, 0.0}, 1.0, {}), DomainError);
}

TEST_CASE("capped entropy prox stays in the capped simplex") {
  CounterRng rng(103);
  for (int k = 0; k < 2000; ++k) {
    Vector x0(8), xi(8), pen(8);
    for (auto& v : x0) v = std::exp(rng.uniform(-5.0, 2.0));
    for (auto& v : xi) v = rng.uniform(-10.0, 10.0);
    for (auto& v : pen) v = rng.uniform(0.0, 1.0);
    const double cap = std::exp(rng.uniform(-2.0, 3.0));
    const auto x = prox_entropy_capped(x0, xi, 0.5, pen, MassRule{cap, std::nullopt});
    for (double v : x) CHECK(v > 0.0);
    CHECK(l1(x) <= cap * (1.0 + 1e-14));
    const auto free = prox_entropy_capped(x0, xi, 0.5, pen);
    if (l1(free) <= cap) CHECK(x == free);
  }
}

TEST_CASE("entropy prox clamps extreme exponents") {
  std::size_t clamps = 0;
  const auto x = prox_entropy_capped(Vector{1.0, 1.0}, Vector{1e6, -1e6}, 1.0, {}, {}, &clamps);
  CHECK(clamps >= 2);
  CHECK(x[0] > 0.0);
  CHECK(std::isfinite(x[1]));
}

TEST_CASE("Euclidean l1 prox") {
  CHECK_THAT(prox_euclidean_l1_nonneg(Vector{2.0}, Vector{0.5}, 0.3)[0], WithinAbs(1.2, 1e-15));
  CHECK(prox_euclidean_l1_nonneg(Vector{1.0}, Vector{2.0}, 0.0)[0] == 0.0);
  CounterRng rng(104);
  for (int k = 0; k < 200; ++k) {
    const double y0 = rng.uniform(-3.0, 3.0), xi = rng.uniform(-3.0, 3.0), lam = rng.uniform(0.0, 2.0);
    const double oracle = golden_min(
        [&](double y) { return 0.5 * (y - y0) * (y - y0) + xi * y + lam * std::abs(y); }, 0.0, 20.0);
    CHECK_THAT(prox_euclidean_l1_nonneg(Vector{y0}, Vector{xi}, lam)[0], WithinAbs(oracle, 1e-6));
  }
}

TEST_CASE("Bregman distances") {
  CHECK_THAT(bregman(ProximalSetup::euclidean(), Vector{1.0, 2.0}, Vector{0.0, 0.0}), WithinAbs(2.5, 1e-15));
  const Vector third(3, 1.0 / 3.0);
  CHECK(bregman(ProximalSetup::entropy(), third, third) == 0.0);
  CHECK_THROWS_AS(bregman(ProximalSetup::entropy(), Vector{0.0, 1.0}, Vector{1.0, 1.0}), DomainError);

  CounterRng rng(105);
  for (int k = 0; k < 500; ++k) {
    Vector x(5), x0(5);
    for (auto& v : x) v = std::exp(rng.uniform(-4.0, 2.0));
    for (auto& v : x0) v = std::exp(rng.uniform(-4.0, 2.0));
    double kl = 0.0;
    for (std::size_t j = 0; j < 5; ++j) kl += x[j] * std::log(x[j] / x0[j]) - x[j] + x0[j];
    CHECK_THAT(bregman(ProximalSetup::entropy(), x, x0), WithinRel(kl, 1e-10));
    CHECK(bregman(ProximalSetup::entropy(), x, x0) >= 0.0);
  }
}

TEST_CASE("Bregman distance dominates half the squared setup norm") {
  CounterRng rng(106);
  for (int k = 0; k < 1000; ++k) {
    const double cap = std::exp(rng.uniform(-1.0, 3.0));
    ProximalSetup setup = ProximalSetup::entropy_capped(cap);
    setup.blocks[0].end = 6;
    setup.blocks[0].mass_bound = cap;
    Vector x(6), x0(6);
    double sx = 0.0, s0 = 0.0;
    for (auto& v : x) sx += (v = rng.uniform_open());
    for (auto& v : x0) s0 += (v = rng.uniform_open());
    // points of the capped simplex, one of them possibly on its boundary
    const double fx = cap * rng.uniform_open() / sx, f0 = cap / s0;
    for (auto& v : x) v *= fx;
    for (auto& v : x0) v *= f0;
    Vector d(6);
    for (std::size_t j = 0; j < 6; ++j) d[j] = x[j] - x0[j];
    CHECK(bregman(setup, x, x0) >= 0.5 * primal_norm_sq(setup, d) * (1.0 - 1e-12));

    Vector e(6), e0(6);
    for (auto& v : e) v = rng.uniform(-3.0, 3.0);
    for (auto& v : e0) v = rng.uniform(-3.0, 3.0);
    Vector de(6);
    for (std::size_t j = 0; j < 6; ++j) de[j] = e[j] - e0[j];
    CHECK_THAT(bregman(ProximalSetup::euclidean(), e, e0),
               WithinRel(0.5 * primal_norm_sq(ProximalSetup::euclidean(), de), 1e-12));
  }
}
