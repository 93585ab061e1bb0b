#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pmp/cmp.hpp"
#include "pmp/rb.hpp"

namespace pmp {

struct Event {
  std::size_t user = 0;
  double time = 0.0;
};

/// Events sorted by strictly increasing time on [0, horizon].
struct EventSequence {
  std::size_t users = 0;
  double horizon = 0.0;
  std::vector<Event> events;

  /// Throws std::invalid_argument on out-of-range users, times outside
  /// [0, horizon] or non-increasing times.
  void validate() const;
};

/// Header "U T", then one "user,time" line per event. Events outside
/// [0, T] are dropped with a warning; other defects raise ParseError.
EventSequence read_events(const std::string& path);
void write_events(const std::string& path, const EventSequence& seq);

/// Exponential kernel g(t) = c e^{-ct}, G(t) = 1 - e^{-ct}.
struct HawkesStats {
  std::size_t users = 0;
  double horizon = 0.0;
  double kernel_rate = 1.0;
  Vector d;                               // d_u = sum_{j: u_j = u} G(T - t_j)
  std::vector<std::size_t> event_user;    // u_j
  // Row u_j of A_j as (u', a^j_{u_j u'}) pairs with a nonzero value,
  // a^j_{u_j u'} = sum_{k: t_k < t_j, u_k = u'} g(t_j - t_k).
  std::vector<std::vector<std::pair<std::size_t, double>>> excitation;
};

/// Per-user decaying accumulators, O(m U).
HawkesStats precompute_stats(const EventSequence& seq, double kernel_rate);

struct NetworkProblem {
  PoissonProblem problem;
  std::size_t users = 0;
  std::vector<std::size_t> event_of_row;  // rows are grouped by user
  std::vector<std::size_t> user_offsets;  // rows of user u: [user_offsets[u], user_offsets[u+1])

  /// At most b blocks with boundaries between users, balanced by row count.
  BlockPartition user_blocks(std::size_t b) const;
};

struct NetworkSetup {
  double alpha1 = 1.0;  // dgf weight of the base rates
  double alpha2 = 1.0;  // dgf weight of the infectivity matrix
};

/// z = [x; vec(X)] with X row-major at U + u*U + u'. s = [T 1; d_{u'}],
/// c_j = 1, row j = [e_{u_j}; vec(A_j)], l1 penalty lambda1 on X only.
/// Entropy blocks: x capped at m/T, X capped at m/lambda1 (uncapped if lambda1 = 0).
NetworkProblem assemble_network_problem(const HawkesStats& stats, double lambda1,
                                        const NetworkSetup& setup = {});

/// Ogata thinning. infectivity is U x U row-major; entry (u, u') is the
/// excitation of user u by events of u'. Requires max row sum < 1.
EventSequence simulate_hawkes(const Vector& base, const Vector& infectivity, double horizon,
                              double kernel_rate, std::uint64_t seed, std::size_t max_events = 10'000'000);

struct HawkesNetwork {
  Vector base;         // U
  Vector infectivity;  // U x U row-major
};

/// Random ground truth: base rates uniform in [0.5, 1.5] * base_scale, each
/// off-diagonal pair linked with probability `link_prob` (self-excitation
/// always present), rows rescaled to sum `branching` < 1.
HawkesNetwork random_network(std::size_t users, std::uint64_t seed, double base_scale = 0.1,
                             double link_prob = 0.4, double branching = 0.6);

enum class NetworkSolver { cmp, rb_cmp, md };

struct NetworkOptions {
  double kernel_rate = 1.0;
  NetworkSetup setup;
  NetworkSolver solver = NetworkSolver::cmp;
  std::size_t blocks = 10;  // rb_cmp
  std::uint64_t seed = 0;   // rb_cmp
  double gamma0 = 1.0;      // md
  SolveOptions solve;
};

struct NetworkEstimate {
  Vector base;         // U
  Vector infectivity;  // U x U row-major
  SolveReport report;
};

NetworkEstimate estimate_network(const EventSequence& seq, double lambda1, const NetworkOptions& opts);
/// Runs the solver on an already assembled problem.
NetworkEstimate estimate_network(const NetworkProblem& np, const NetworkOptions& opts);

void write_base_csv(const std::string& path, const Vector& base);
void write_infectivity_csv(const std::string& path, const Vector& infectivity, std::size_t users);

}  // namespace pmp
