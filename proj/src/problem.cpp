#include "pmp/problem.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

namespace pmp {

namespace {
bool g_warnings_enabled = true;
}

void warn(const std::string& msg) {
  if (g_warnings_enabled) std::cerr << "warning: " << msg << '\n';
}

void set_warnings_enabled(bool enabled) { g_warnings_enabled = enabled; }

PenaltySpec PenaltySpec::l1(double lambda, std::size_t n) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("l1 weight must be >= 0");
  PenaltySpec p;
  if (lambda > 0.0) p.weights_.assign(n, lambda);
  return p;
}

PenaltySpec PenaltySpec::weighted_l1(Vector weights) {
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw std::invalid_argument("l1 weights must be >= 0");
  }
  PenaltySpec p;
  if (std::any_of(weights.begin(), weights.end(), [](double w) { return w > 0.0; })) {
    p.weights_ = std::move(weights);
  }
  return p;
}

double PenaltySpec::value(std::span<const double> x) const {
  if (weights_.empty()) return 0.0;
  double acc = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) acc += weights_[j] * std::abs(x[j]);
  return acc;
}

PoissonProblem PoissonProblem::assemble(Vector s, Vector c, SparseMatrix a, PenaltySpec penalty,
                                        ProximalSetup setup, AssemblyInfo* info) {
  const std::size_t n = s.size();
  if (a.rows() != c.size() || a.cols() != n) {
    throw DimensionError("A is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                         " but |c| = " + std::to_string(c.size()) + ", |s| = " + std::to_string(n));
  }
  if (!penalty.empty() && penalty.weights().size() != n) throw DimensionError("penalty size != n");
  for (double v : s) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("s must be finite and nonnegative");
  }
  for (double v : c) {
    if (!std::isfinite(v) || v < 0.0) throw DomainError("c must be finite and nonnegative");
  }

  AssemblyInfo local;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i] > 0.0) local.kept_rows.push_back(i);
  }
  local.dropped_rows = c.size() - local.kept_rows.size();
  if (local.dropped_rows > 0) {
    warn("dropped " + std::to_string(local.dropped_rows) + " zero-count row(s)");
    Vector kept_c;
    kept_c.reserve(local.kept_rows.size());
    for (auto i : local.kept_rows) kept_c.push_back(c[i]);
    a = a.select_rows(local.kept_rows);
    c = std::move(kept_c);
  }
  for (std::size_t i = 0; i < a.rows(); ++i) {
    if (a.row_empty(i)) {
      throw DomainError("row " + std::to_string(local.kept_rows[i]) +
                        " has a positive count but no nonzeros; the objective is unbounded");
    }
  }

  PoissonProblem p;
  p.total_count_ = std::accumulate(c.begin(), c.end(), 0.0);
  for (double ci : c) p.c0_ += ci * (1.0 - std::log(ci));

  // blocks must tile [0, n)
  setup.blocks = resolved_blocks(setup, n);
  std::size_t expect = 0;
  for (const auto& b : setup.blocks) {
    if (b.begin != expect || b.end < b.begin || !(b.weight > 0.0)) {
      throw DimensionError("primal blocks must tile [0, n) with positive weights");
    }
    expect = b.end;
  }
  if (expect != n) throw DimensionError("primal blocks must tile [0, n)");
  if (setup.exact_mass && (setup.blocks.size() != 1 || setup.kind != SetupKind::entropy ||
                           !(*setup.exact_mass > 0.0))) {
    throw std::invalid_argument("exact mass needs a single positive entropy block");
  }
  for (auto& b : setup.blocks) {
    double min_rate = std::numeric_limits<double>::infinity();
    for (std::size_t j = b.begin; j < b.end; ++j) min_rate = std::min(min_rate, s[j] + penalty.weight(j));
    const double shell = min_rate > 0.0 ? p.total_count_ / min_rate : std::numeric_limits<double>::infinity();
    if (b.cap_rule == CapRule::shell) b.cap = shell;
    if (b.cap_rule == CapRule::none) b.cap = std::numeric_limits<double>::infinity();
    if (b.cap_rule == CapRule::fixed && !(b.cap > 0.0)) throw std::invalid_argument("cap must be positive");
    b.mass_bound = setup.exact_mass ? *setup.exact_mass : std::min(b.cap, shell);
  }

  p.s_ = std::move(s);
  p.c_ = std::move(c);
  p.a_ = std::move(a);
  p.penalty_ = std::move(penalty);
  p.setup_ = std::move(setup);
  if (info) *info = std::move(local);
  return p;
}

namespace {

double objective_impl(const PoissonProblem& p, std::span<const double> x, bool throw_on_domain) {
  if (x.size() != p.n()) throw DimensionError("objective: |x| != n");
  double lin = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    if (x[j] < 0.0) {
      if (throw_on_domain) throw DomainError("objective: x has a negative entry");
      return std::numeric_limits<double>::infinity();
    }
    lin += p.s()[j] * x[j];
  }
  Vector ax(p.m());
  p.a().multiply(x, ax);
  double logs = 0.0;
  for (std::size_t i = 0; i < ax.size(); ++i) {
    if (!(ax[i] > 0.0)) {
      if (throw_on_domain) throw DomainError("objective: a_i^T x <= 0 at row " + std::to_string(i));
      return std::numeric_limits<double>::infinity();
    }
    logs += p.c()[i] * std::log(ax[i]);
  }
  return lin - logs + p.penalty().value(x);
}

}  // namespace

double objective(const PoissonProblem& p, std::span<const double> x) { return objective_impl(p, x, true); }

double objective_or_inf(const PoissonProblem& p, std::span<const double> x) {
  return objective_impl(p, x, false);
}

double saddle_value(const PoissonProblem& p, std::span<const double> x, std::span<const double> y) {
  if (x.size() != p.n() || y.size() != p.m()) throw DimensionError("saddle_value: size mismatch");
  Vector ax(p.m());
  p.a().multiply(x, ax);
  double v = p.c0() + p.penalty().value(x);
  for (std::size_t j = 0; j < x.size(); ++j) v += p.s()[j] * x[j];
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (!(y[i] > 0.0)) throw DomainError("saddle_value: y must be positive");
    v += p.c()[i] * std::log(y[i]) - y[i] * ax[i];
  }
  return v;
}

OperatorValue monotone_operator(const PoissonProblem& p, std::span<const double> x,
                                std::span<const double> y) {
  if (x.size() != p.n() || y.size() != p.m()) throw DimensionError("monotone_operator: size mismatch");
  OperatorValue f{Vector(p.n()), Vector(p.m())};
  p.a().multiply_transpose(y, f.g_x);
  for (std::size_t j = 0; j < p.n(); ++j) f.g_x[j] = p.s()[j] - f.g_x[j];
  p.a().multiply(x, f.g_y);
  return f;
}

NormEstimate spectral_norm(const SparseMatrix& a, std::size_t r0, std::size_t r1,
                           std::span<const double> col_scale, double rel_tol, std::size_t max_iter) {
  const std::size_t n = a.cols();
  NormEstimate est;
  if (n == 0 || r1 <= r0) return est;
  Vector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  Vector sv(n), av(r1 - r0), w(n);
  double prev = 0.0;
  est.converged = false;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    for (std::size_t j = 0; j < n; ++j) sv[j] = col_scale.empty() ? v[j] : v[j] * col_scale[j];
    a.multiply_rows(r0, r1, sv, av);
    double norm_av = 0.0;
    for (double e : av) norm_av += e * e;
    norm_av = std::sqrt(norm_av);
    est.value = norm_av;
    est.iterations = it;
    if (norm_av == 0.0) {
      est.converged = true;
      break;
    }
    // w = D A_r^T (A_r D v)
    std::fill(w.begin(), w.end(), 0.0);
    a.add_transpose_rows(r0, r1, av, w);
    if (!col_scale.empty()) {
      for (std::size_t j = 0; j < n; ++j) w[j] *= col_scale[j];
    }
    double norm_w = 0.0;
    for (double e : w) norm_w += e * e;
    norm_w = std::sqrt(norm_w);
    for (std::size_t j = 0; j < n; ++j) v[j] = w[j] / norm_w;
    if (it > 1 && std::abs(norm_av - prev) <= rel_tol * norm_av) {
      est.converged = true;
      break;
    }
    prev = norm_av;
  }
  return est;
}

double operator_norm(const SparseMatrix& a, SetupKind kind) {
  if (kind == SetupKind::entropy) return a.max_column_norm(0, a.cols(), 0, a.rows());
  const auto est = spectral_norm(a, 0, a.rows());
  if (!est.converged) warn("power iteration hit the iteration cap; operator norm may be inaccurate");
  return est.value;
}

double operator_norm(const PoissonProblem& p, std::size_t r0, std::size_t r1) {
  const auto& setup = p.setup();
  if (setup.kind == SetupKind::entropy) {
    // ||A x||_2 <= sum_k ||x_k||_1 c_k and sum_k w_k ||x_k||_1^2 / R_k <= 1
    double acc = 0.0;
    for (const auto& b : setup.blocks) {
      const double ck = p.a().max_column_norm(b.begin, b.end, r0, r1);
      if (ck == 0.0) continue;
      if (!std::isfinite(b.mass_bound)) return std::numeric_limits<double>::infinity();
      acc += b.mass_bound * ck * ck / b.weight;
    }
    return std::sqrt(acc);
  }
  Vector scale(p.n());
  for (const auto& b : setup.blocks) {
    for (std::size_t j = b.begin; j < b.end; ++j) scale[j] = 1.0 / std::sqrt(b.weight);
  }
  const auto est = spectral_norm(p.a(), r0, r1, scale);
  if (!est.converged) warn("power iteration hit the iteration cap; operator norm may be inaccurate");
  return est.value;
}

double mass_identity_residual(const PoissonProblem& p, std::span<const double> x) {
  double v = p.penalty().value(x);
  for (std::size_t j = 0; j < x.size(); ++j) v += p.s()[j] * x[j];
  return std::abs(v - p.total_count());
}

Vector shell_initial_point(const PoissonProblem& p) {
  const auto& setup = p.setup();
  if (setup.exact_mass) return Vector(p.n(), *setup.exact_mass / static_cast<double>(p.n()));
  double rate = 0.0;
  for (std::size_t j = 0; j < p.n(); ++j) rate += p.s()[j] + p.penalty().weight(j);
  if (!(rate > 0.0)) throw DomainError("s + penalty weights vanish; the objective is unbounded below");
  Vector x(p.n(), p.total_count() / rate);
  for (const auto& b : setup.blocks) {
    const double mass = x[b.begin] * static_cast<double>(b.end - b.begin);
    if (mass > b.cap) {
      for (std::size_t j = b.begin; j < b.end; ++j) x[j] = b.cap / static_cast<double>(b.end - b.begin);
    }
  }
  return x;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line, const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line) + ": " + what);
}

Vector parse_reals(const std::string& text, std::size_t count, const std::string& path,
                   std::size_t line) {
  std::istringstream in(text);
  Vector out;
  out.reserve(count);
  double v;
  while (in >> v) out.push_back(v);
  if (!in.eof()) parse_fail(path, line, "expected a real number");
  if (out.size() != count) {
    parse_fail(path, line, "expected " + std::to_string(count) + " values, got " + std::to_string(out.size()));
  }
  return out;
}

}  // namespace

ProblemData read_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  std::size_t lineno = 0;
  auto next_line = [&](const char* what) {
    while (std::getline(in, line)) {
      ++lineno;
      if (line.find_first_not_of(" \t\r") != std::string::npos) return;
    }
    parse_fail(path, lineno, std::string("unexpected end of file, expected ") + what);
  };

  next_line("header");
  std::size_t n = 0, m = 0;
  {
    std::istringstream hdr(line);
    std::string extra;
    if (!(hdr >> n >> m) || (hdr >> extra)) parse_fail(path, lineno, "header must be `n m`");
  }
  next_line("s");
  Vector s = parse_reals(line, n, path, lineno);
  next_line("c");
  Vector c = parse_reals(line, m, path, lineno);

  std::vector<Triplet> entries;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream e(line);
    long long i = -1, j = -1;
    double v = 0.0;
    std::string extra;
    if (!(e >> i >> j >> v) || (e >> extra)) parse_fail(path, lineno, "entry must be `i j value`");
    if (i < 0 || j < 0 || static_cast<std::size_t>(i) >= m || static_cast<std::size_t>(j) >= n) {
      parse_fail(path, lineno, "entry index out of range");
    }
    if (!std::isfinite(v) || v < 0.0) parse_fail(path, lineno, "entry must be finite and nonnegative");
    entries.push_back({static_cast<std::size_t>(i), static_cast<std::size_t>(j), v});
  }
  return {std::move(s), std::move(c), SparseMatrix::from_triplets(m, n, std::move(entries))};
}

void write_problem_file(const std::string& path, std::span<const double> s,
                        std::span<const double> c, const SparseMatrix& a) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out.precision(17);
  out << s.size() << ' ' << c.size() << '\n';
  for (std::size_t j = 0; j < s.size(); ++j) out << (j ? " " : "") << s[j];
  out << '\n';
  for (std::size_t i = 0; i < c.size(); ++i) out << (i ? " " : "") << c[i];
  out << '\n';
  for (const auto& t : a.triplets()) out << t.row << ' ' << t.col << ' ' << t.value << '\n';
  if (!out) throw ParseError("failed writing " + path);
}

}  // namespace pmp
