#include "pmp/hawkes.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pmp/baselines.hpp"
#include "pmp/rng.hpp"

namespace pmp {

void EventSequence::validate() const {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
  double prev = -1.0;
  for (const auto& e : events) {
    if (e.user >= users) throw std::invalid_argument("event user out of range");
    if (!(e.time >= 0.0 && e.time <= horizon)) throw std::invalid_argument("event time outside [0, T]");
    if (!(e.time > prev)) throw std::invalid_argument("event times must be strictly increasing");
    prev = e.time;
  }
}

EventSequence read_events(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  auto fail = [&](std::size_t line, const std::string& what) -> void {
    throw ParseError(path + ":" + std::to_string(line) + ": " + what);
  };
  EventSequence seq;
  std::string text;
  std::size_t line = 0;
  bool header = false;
  std::size_t dropped = 0;
  double prev = -1.0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    if (!header) {
      std::istringstream hs(text);
      long long u = -1;
      if (!(hs >> u >> seq.horizon) || u < 0) fail(line, "expected header 'U T'");
      std::string rest;
      if (hs >> rest) fail(line, "trailing text after header");
      if (!(seq.horizon > 0.0) || !std::isfinite(seq.horizon)) fail(line, "horizon must be positive");
      seq.users = static_cast<std::size_t>(u);
      header = true;
      continue;
    }
    std::replace(text.begin(), text.end(), ',', ' ');
    std::istringstream ls(text);
    long long u = -1;
    double t = 0.0;
    if (!(ls >> u >> t)) fail(line, "expected 'user,time'");
    std::string rest;
    if (ls >> rest) fail(line, "trailing text after event");
    if (u < 0 || static_cast<std::size_t>(u) >= seq.users) fail(line, "user id out of range");
    if (!std::isfinite(t)) fail(line, "non-finite time");
    if (t < 0.0 || t > seq.horizon) {
      ++dropped;
      continue;
    }
    if (!(t > prev)) fail(line, "event times must be strictly increasing");
    prev = t;
    seq.events.push_back({static_cast<std::size_t>(u), t});
  }
  if (!header) throw ParseError(path + ": missing header");
  if (dropped > 0) warn("dropped " + std::to_string(dropped) + " event(s) outside [0, T]");
  return seq;
}

void write_events(const std::string& path, const EventSequence& seq) {
  std::ostringstream out;
  out << seq.users << ' ' << format_double(seq.horizon) << '\n';
  for (const auto& e : seq.events) out << e.user << ',' << format_double(e.time) << '\n';
  write_text_atomic(path, out.str());
}

HawkesStats precompute_stats(const EventSequence& seq, double kernel_rate) {
  seq.validate();
  if (!(kernel_rate > 0.0)) throw std::invalid_argument("kernel rate must be positive");
  const std::size_t U = seq.users;
  const double c = kernel_rate;
  HawkesStats st;
  st.users = U;
  st.horizon = seq.horizon;
  st.kernel_rate = c;
  st.d.assign(U, 0.0);
  st.event_user.reserve(seq.events.size());
  st.excitation.reserve(seq.events.size());

  // acc[u] = sum_{k: u_k = u, t_k <= last[u]} e^{-c (last[u] - t_k)}
  Vector acc(U, 0.0), last(U, 0.0);
  for (const auto& e : seq.events) {
    st.d[e.user] += -std::expm1(-c * (seq.horizon - e.time));
    std::vector<std::pair<std::size_t, double>> row;
    for (std::size_t u = 0; u < U; ++u) {
      if (acc[u] == 0.0) continue;
      const double v = c * acc[u] * std::exp(-c * (e.time - last[u]));
      if (v > 0.0) row.emplace_back(u, v);
    }
    acc[e.user] = acc[e.user] * std::exp(-c * (e.time - last[e.user])) + 1.0;
    last[e.user] = e.time;
    st.event_user.push_back(e.user);
    st.excitation.push_back(std::move(row));
  }
  return st;
}

NetworkProblem assemble_network_problem(const HawkesStats& stats, double lambda1, const NetworkSetup& setup) {
  const std::size_t U = stats.users;
  const std::size_t m = stats.event_user.size();
  if (stats.d.size() != U || stats.excitation.size() != m) throw DimensionError("inconsistent Hawkes statistics");
  if (m == 0) throw std::invalid_argument("no events to fit");
  if (!(lambda1 >= 0.0)) throw std::invalid_argument("lambda1 must be >= 0");
  const std::size_t n = U + U * U;

  NetworkProblem np;
  np.users = U;
  np.event_of_row.resize(m);
  std::iota(np.event_of_row.begin(), np.event_of_row.end(), std::size_t{0});
  std::stable_sort(np.event_of_row.begin(), np.event_of_row.end(),
                   [&](std::size_t a, std::size_t b) { return stats.event_user[a] < stats.event_user[b]; });
  np.user_offsets.assign(U + 1, 0);
  for (auto u : stats.event_user) {
    if (u >= U) throw DimensionError("event user out of range");
    ++np.user_offsets[u + 1];
  }
  std::partial_sum(np.user_offsets.begin(), np.user_offsets.end(), np.user_offsets.begin());

  std::vector<Triplet> trip;
  for (std::size_t r = 0; r < m; ++r) {
    const std::size_t j = np.event_of_row[r];
    const std::size_t u = stats.event_user[j];
    trip.push_back({r, u, 1.0});
    for (const auto& [v, a] : stats.excitation[j]) {
      if (v >= U) throw DimensionError("excitation user out of range");
      trip.push_back({r, U + u * U + v, a});
    }
  }
  Vector s(n);
  for (std::size_t u = 0; u < U; ++u) {
    s[u] = stats.horizon;
    for (std::size_t v = 0; v < U; ++v) s[U + u * U + v] = stats.d[v];
  }
  Vector pen(n, 0.0);
  std::fill(pen.begin() + static_cast<std::ptrdiff_t>(U), pen.end(), lambda1);

  ProximalSetup ps = ProximalSetup::entropy();
  const double md = static_cast<double>(m);
  ps.blocks.push_back({0, U, setup.alpha1, CapRule::fixed, md / stats.horizon});
  if (lambda1 > 0.0) {
    ps.blocks.push_back({U, n, setup.alpha2, CapRule::fixed, md / lambda1});
  } else {
    ps.blocks.push_back({U, n, setup.alpha2, CapRule::none});
  }
  np.problem = PoissonProblem::assemble(std::move(s), Vector(m, 1.0), SparseMatrix::from_triplets(m, n, std::move(trip)),
                                        PenaltySpec::weighted_l1(std::move(pen)), std::move(ps));
  return np;
}

BlockPartition NetworkProblem::user_blocks(std::size_t b) const {
  const std::size_t m = problem.m();
  if (b == 0) throw std::invalid_argument("block count must be positive");
  std::vector<std::size_t> off{0};
  for (std::size_t k = 1; k < b; ++k) {
    const double target = static_cast<double>(k) * static_cast<double>(m) / static_cast<double>(b);
    auto it = std::lower_bound(user_offsets.begin(), user_offsets.end(), static_cast<std::size_t>(target));
    std::size_t cut = it == user_offsets.end() ? m : *it;
    if (it != user_offsets.begin()) {
      const std::size_t below = *(it - 1);
      if (target - static_cast<double>(below) < static_cast<double>(cut) - target) cut = below;
    }
    if (cut > off.back() && cut < m) off.push_back(cut);
  }
  off.push_back(m);
  return BlockPartition::from_offsets(std::move(off), m);
}

HawkesNetwork random_network(std::size_t users, std::uint64_t seed, double base_scale, double link_prob,
                             double branching) {
  if (users == 0) throw std::invalid_argument("need at least one user");
  if (!(branching >= 0.0 && branching < 1.0)) throw std::invalid_argument("branching must lie in [0, 1)");
  CounterRng rng(seed);
  HawkesNetwork net;
  net.base.resize(users);
  for (auto& b : net.base) b = base_scale * rng.uniform(0.5, 1.5);
  net.infectivity.assign(users * users, 0.0);
  for (std::size_t u = 0; u < users; ++u) {
    double row = 0.0;
    for (std::size_t v = 0; v < users; ++v) {
      if (u == v || rng.uniform() < link_prob) row += (net.infectivity[u * users + v] = rng.uniform(0.2, 1.0));
    }
    for (std::size_t v = 0; v < users; ++v) net.infectivity[u * users + v] *= branching / row;
  }
  return net;
}

EventSequence simulate_hawkes(const Vector& base, const Vector& infectivity, double horizon, double kernel_rate,
                              std::uint64_t seed, std::size_t max_events) {
  const std::size_t U = base.size();
  if (infectivity.size() != U * U) throw DimensionError("infectivity must be U x U");
  if (!(horizon > 0.0) || !(kernel_rate > 0.0)) throw std::invalid_argument("horizon and kernel rate must be positive");
  for (double v : base) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("base rates must be >= 0");
  }
  for (std::size_t u = 0; u < U; ++u) {
    double row = 0.0;
    for (std::size_t v = 0; v < U; ++v) {
      const double x = infectivity[u * U + v];
      if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument("infectivity must be >= 0");
      row += x;
    }
    if (!(row < 1.0)) throw std::invalid_argument("infectivity row sums must be < 1");
  }

  EventSequence seq;
  seq.users = U;
  seq.horizon = horizon;
  CounterRng rng(seed);
  const double c = kernel_rate;
  Vector excite(U, 0.0);  // sum_{k: u_k = v} c e^{-c (t_ref - t_k)}
  Vector lam(U);
  double t_ref = 0.0, t = 0.0;
  auto intensities = [&](double at) {
    const double decay = std::exp(-c * (at - t_ref));
    double total = 0.0;
    for (std::size_t u = 0; u < U; ++u) {
      double l = base[u];
      for (std::size_t v = 0; v < U; ++v) l += infectivity[u * U + v] * excite[v] * decay;
      lam[u] = l;
      total += l;
    }
    return total;
  };
  for (;;) {
    // intensities only decay between events, so the current total bounds the future
    const double bound = intensities(t);
    if (!(bound > 0.0)) break;
    t += rng.exponential(bound);
    if (t > horizon) break;
    const double total = intensities(t);
    const double draw = rng.uniform() * bound;
    if (draw >= total) continue;
    std::size_t u = 0;
    double cum = lam[0];
    while (draw >= cum && u + 1 < U) cum += lam[++u];
    if (seq.events.size() >= max_events) {
      throw ExplosionGuard("simulation exceeded " + std::to_string(max_events) + " events");
    }
    if (!seq.events.empty() && !(t > seq.events.back().time)) continue;  // tie in floating point
    seq.events.push_back({u, t});
    const double decay = std::exp(-c * (t - t_ref));
    for (auto& e : excite) e *= decay;
    excite[u] += c;
    t_ref = t;
  }
  return seq;
}

NetworkEstimate estimate_network(const NetworkProblem& np, const NetworkOptions& opts) {
  NetworkEstimate est;
  switch (opts.solver) {
    case NetworkSolver::cmp: est.report = solve_cmp(np.problem, opts.solve); break;
    case NetworkSolver::rb_cmp:
      est.report = solve_rb_cmp(np.problem, np.user_blocks(opts.blocks), opts.solve, opts.seed);
      break;
    case NetworkSolver::md: est.report = solve_md(np.problem, opts.gamma0, opts.solve); break;
  }
  const auto& z = est.report.final_x;
  const auto U = static_cast<std::ptrdiff_t>(np.users);
  est.base.assign(z.begin(), z.begin() + U);
  est.infectivity.assign(z.begin() + U, z.end());
  return est;
}

NetworkEstimate estimate_network(const EventSequence& seq, double lambda1, const NetworkOptions& opts) {
  const auto stats = precompute_stats(seq, opts.kernel_rate);
  return estimate_network(assemble_network_problem(stats, lambda1, opts.setup), opts);
}

void write_base_csv(const std::string& path, const Vector& base) {
  std::ostringstream out;
  for (double v : base) out << format_double(v) << '\n';
  write_text_atomic(path, out.str());
}

void write_infectivity_csv(const std::string& path, const Vector& infectivity, std::size_t users) {
  if (infectivity.size() != users * users) throw DimensionError("infectivity must be U x U");
  std::ostringstream out;
  for (std::size_t u = 0; u < users; ++u) {
    for (std::size_t v = 0; v < users; ++v) {
      if (v) out << ',';
      out << format_double(infectivity[u * users + v]);
    }
    out << '\n';
  }
  write_text_atomic(path, out.str());
}

}  // namespace pmp
