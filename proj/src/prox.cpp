#include "pmp/prox.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pmp/kernels.hpp"

namespace pmp {

ProximalSetup ProximalSetup::entropy() { return ProximalSetup{}; }

ProximalSetup ProximalSetup::entropy_capped(double cap) {
  ProximalSetup s;
  PrimalBlock b;
  b.end = PrimalBlock::kToEnd;
  b.cap_rule = CapRule::fixed;
  b.cap = cap;
  s.blocks.push_back(b);
  return s;
}

ProximalSetup ProximalSetup::entropy_shell_capped() {
  ProximalSetup s;
  PrimalBlock b;
  b.end = PrimalBlock::kToEnd;
  b.cap_rule = CapRule::shell;
  s.blocks.push_back(b);
  return s;
}

ProximalSetup ProximalSetup::entropy_exact_mass(double mass) {
  ProximalSetup s;
  s.exact_mass = mass;
  return s;
}

ProximalSetup ProximalSetup::euclidean() {
  ProximalSetup s;
  s.kind = SetupKind::euclidean;
  return s;
}

std::vector<PrimalBlock> resolved_blocks(const ProximalSetup& setup, std::size_t n) {
  if (!setup.blocks.empty()) {
    auto blocks = setup.blocks;
    for (auto& b : blocks) {
      if (b.end == PrimalBlock::kToEnd) b.end = n;
    }
    return blocks;
  }
  PrimalBlock b;
  b.begin = 0;
  b.end = n;
  return {b};
}

Vector prox_log_barrier(std::span<const double> eta, double beta, std::span<const double> c) {
  if (eta.size() != c.size()) throw DimensionError("prox_log_barrier: size mismatch");
  Vector out(eta.size());
  for (std::size_t i = 0; i < eta.size(); ++i) out[i] = kernels::log_barrier_root(eta[i], beta * c[i]);
  return out;
}

namespace {

void apply_mass_rule(std::span<double> x, const MassRule& rule) {
  if (!rule.cap && !rule.exact) return;
  const double total = std::accumulate(x.begin(), x.end(), 0.0);
  double target = 0.0;
  if (rule.exact) {
    target = *rule.exact;
  } else if (total > *rule.cap) {
    target = *rule.cap;
  } else {
    return;
  }
  if (std::isinf(total)) {
    // overflowed entries take all the mass in the limit
    const auto big = static_cast<double>(std::count_if(x.begin(), x.end(), [](double v) { return std::isinf(v); }));
    for (auto& v : x) v = std::isinf(v) ? target / big : std::numeric_limits<double>::min();
    return;
  }
  const double scale = target / total;
  for (auto& v : x) v *= scale;
}

}  // namespace

Vector prox_entropy_capped(std::span<const double> x0, std::span<const double> xi, double alpha,
                           std::span<const double> linear_penalty, MassRule rule,
                           std::size_t* clamp_events) {
  if (xi.size() != x0.size() || (!linear_penalty.empty() && linear_penalty.size() != x0.size())) {
    throw DimensionError("prox_entropy_capped: size mismatch");
  }
  for (double v : x0) {
    if (!(v > 0.0)) throw DomainError("prox_entropy_capped: x0 must be positive");
  }
  Vector out(x0.size());
  const auto clamps = kernels::serial::entropy_update(x0, xi, linear_penalty, 1.0, 1.0 / alpha, out);
  if (clamp_events) *clamp_events += clamps;
  apply_mass_rule(out, rule);
  return out;
}

Vector prox_euclidean_l1_nonneg(std::span<const double> y0, std::span<const double> xi,
                                double lambda) {
  if (xi.size() != y0.size()) throw DimensionError("prox_euclidean_l1_nonneg: size mismatch");
  Vector out(y0.size());
  for (std::size_t i = 0; i < y0.size(); ++i) out[i] = std::max(0.0, y0[i] - xi[i] - lambda);
  return out;
}

namespace {

// r log r - r + 1 for r = 1 + d
double kl_unit(double d) {
  if (std::abs(d) < 1e-4) {
    return d * d * (0.5 - d * (1.0 / 6.0 - d / 12.0));
  }
  return (1.0 + d) * std::log1p(d) - d;
}

}  // namespace

double kl_divergence(std::span<const double> x, std::span<const double> x0) {
  if (x.size() != x0.size()) throw DimensionError("kl_divergence: size mismatch");
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (!(x[j] > 0.0) || !(x0[j] > 0.0)) throw DomainError("entropy Bregman distance needs positive arguments");
    const double d = (x[j] - x0[j]) / x0[j];
    // logs taken separately: the ratio overflows when x0 sits at the clamp floor
    acc += std::abs(d) < 1.0 ? x0[j] * kl_unit(d) : x[j] * (std::log(x[j]) - std::log(x0[j])) - x[j] + x0[j];
  }
  return acc;
}

double bregman(const ProximalSetup& setup, std::span<const double> x, std::span<const double> x0) {
  if (x.size() != x0.size()) throw DimensionError("bregman: size mismatch");
  double acc = 0.0;
  for (const auto& b : resolved_blocks(setup, x.size())) {
    const auto xb = x.subspan(b.begin, b.end - b.begin);
    const auto x0b = x0.subspan(b.begin, b.end - b.begin);
    if (setup.kind == SetupKind::entropy) {
      acc += b.weight * kl_divergence(xb, x0b);
    } else {
      double sq = 0.0;
      for (std::size_t j = 0; j < xb.size(); ++j) sq += (xb[j] - x0b[j]) * (xb[j] - x0b[j]);
      acc += b.weight * 0.5 * sq;
    }
  }
  return acc;
}

double primal_norm_sq(const ProximalSetup& setup, std::span<const double> v) {
  double acc = 0.0;
  for (const auto& b : resolved_blocks(setup, v.size())) {
    const auto vb = v.subspan(b.begin, b.end - b.begin);
    if (setup.kind == SetupKind::entropy) {
      double l1 = 0.0;
      for (double e : vb) l1 += std::abs(e);
      const double r = std::isfinite(b.mass_bound) ? b.mass_bound : 1.0;
      acc += b.weight * l1 * l1 / r;
    } else {
      double sq = 0.0;
      for (double e : vb) sq += e * e;
      acc += b.weight * sq;
    }
  }
  return acc;
}

std::size_t primal_prox(const ProximalSetup& setup, std::span<const double> x0,
                        std::span<const double> xi, std::span<const double> pen,
                        double pen_factor, double alpha, std::span<double> out) {
  std::size_t clamps = 0;
  for (const auto& b : resolved_blocks(setup, x0.size())) {
    const auto len = b.end - b.begin;
    const auto x0b = x0.subspan(b.begin, len);
    const auto xib = xi.subspan(b.begin, len);
    const auto penb = pen.empty() ? pen : pen.subspan(b.begin, len);
    const auto outb = out.subspan(b.begin, len);
    const double inv_scale = 1.0 / (alpha * b.weight);
    if (setup.kind == SetupKind::entropy) {
      clamps += kernels::parallel::entropy_update(x0b, xib, penb, pen_factor, inv_scale, outb);
      MassRule rule;
      if (setup.exact_mass) {
        rule.exact = *setup.exact_mass;
      } else if (std::isfinite(b.cap)) {
        rule.cap = b.cap;
      }
      apply_mass_rule(outb, rule);
    } else {
      kernels::parallel::euclidean_update(x0b, xib, penb, pen_factor, inv_scale, outb);
    }
  }
  return clamps;
}

}  // namespace pmp
