#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "pmp/common.hpp"

namespace pmp {

enum class SetupKind { entropy, euclidean };

enum class CapRule {
  none,   // uncapped
  fixed,  // sum of the block <= cap
  shell,  // cap resolved at assembly from s^T x + h(x) <= sum(c)
};

/// One block of the primal variable with its own distance-generating
/// function weight and optional mass cap.
struct PrimalBlock {
  static constexpr std::size_t kToEnd = std::numeric_limits<std::size_t>::max();  // end = n

  std::size_t begin = 0;
  std::size_t end = 0;
  double weight = 1.0;
  CapRule cap_rule = CapRule::none;
  double cap = std::numeric_limits<double>::infinity();
  // Bound on the block's mass used to scale the primal norm. Filled at
  // assembly: the cap, the exact mass, or the shell bound.
  double mass_bound = std::numeric_limits<double>::infinity();
};

/// Proximal setup of the primal variable. The dual variable always uses
/// 1/2 ||y||_2^2.
///
/// Entropy blocks use omega(x) = sum x log x; on {x >= 0, sum x <= R} it is
/// 1-strongly convex w.r.t. ||x||_1 / sqrt(R). Euclidean blocks use
/// 1/2 ||x||_2^2. The aggregate is sum_k weight_k * omega_k.
struct ProximalSetup {
  SetupKind kind = SetupKind::entropy;
  std::vector<PrimalBlock> blocks;   // empty: one unit-weight block covering x
  std::optional<double> exact_mass;  // entropy only; forces sum x = mass

  static ProximalSetup entropy();
  static ProximalSetup entropy_capped(double cap);
  static ProximalSetup entropy_shell_capped();
  static ProximalSetup entropy_exact_mass(double mass);
  static ProximalSetup euclidean();
};

/// Q^beta(eta) elementwise: argmin_{y > 0} 1/2||y||^2 + <eta, y> - beta sum c_i log y_i.
Vector prox_log_barrier(std::span<const double> eta, double beta, std::span<const double> c);

struct MassRule {
  std::optional<double> cap;
  std::optional<double> exact;
};

/// Multiplicative entropy prox x_j = x0_j exp(-(xi_j + penalty_j) / alpha),
/// rescaled onto sum x <= cap when violated, or onto sum x = exact always.
/// Returns the number of clamped exponents through `clamp_events`.
Vector prox_entropy_capped(std::span<const double> x0, std::span<const double> xi, double alpha,
                           std::span<const double> linear_penalty, MassRule rule = {},
                           std::size_t* clamp_events = nullptr);

/// max(0, y0 - xi - lambda) componentwise.
Vector prox_euclidean_l1_nonneg(std::span<const double> y0, std::span<const double> xi,
                                double lambda);

/// Generalized KL divergence sum x log(x/x0) - x + x0, computed without
/// cancellation for x close to x0.
double kl_divergence(std::span<const double> x, std::span<const double> x0);

/// Bregman distance of the setup's aggregated dgf (weights included).
/// Throws DomainError for nonpositive entropy arguments.
double bregman(const ProximalSetup& setup, std::span<const double> x, std::span<const double> x0);

/// ||v||_x^2 = sum_k weight_k ||v_k||_(k)^2 with ||.||_(k) = ||.||_1/sqrt(R_k)
/// for entropy blocks and ||.||_2 for Euclidean ones.
double primal_norm_sq(const ProximalSetup& setup, std::span<const double> v);

/// Blocks of `setup`, or one unit block over [0, n) if none were given.
std::vector<PrimalBlock> resolved_blocks(const ProximalSetup& setup, std::size_t n);

/// Composite primal prox over all blocks of an assembled setup:
/// argmin alpha*V(x, x0) + <xi, x> + pen_factor * sum_j pen_j x_j over the
/// setup's domain. `pen` may be empty. Returns the clamp count.
std::size_t primal_prox(const ProximalSetup& setup, std::span<const double> x0,
                        std::span<const double> xi, std::span<const double> pen,
                        double pen_factor, double alpha, std::span<double> out);

}  // namespace pmp
