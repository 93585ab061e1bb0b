#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmp/common.hpp"
#include "pmp/prox.hpp"
#include "pmp/sparse.hpp"

namespace pmp {

/// Weighted l1 penalty h(x) = sum_j w_j |x_j|. On the nonnegative orthant
/// its gradient is the constant vector w. Homogeneous of degree one.
class PenaltySpec {
 public:
  static PenaltySpec none() { return PenaltySpec{}; }
  static PenaltySpec l1(double lambda, std::size_t n);
  static PenaltySpec weighted_l1(Vector weights);

  bool empty() const { return weights_.empty(); }
  double value(std::span<const double> x) const;
  /// Per-coordinate weights; empty when there is no penalty.
  std::span<const double> weights() const { return weights_; }
  double weight(std::size_t j) const { return weights_.empty() ? 0.0 : weights_[j]; }

 private:
  Vector weights_;
};

struct AssemblyInfo {
  std::size_t dropped_rows = 0;      // rows with c_i = 0
  std::vector<std::size_t> kept_rows;  // original indices of the rows kept
};

/// min_{x >= 0} s^T x - sum_i c_i log(a_i^T x) + h(x), together with the
/// proximal setup used by the saddle-point solvers. Immutable after assembly.
class PoissonProblem {
 public:
  /// Drops rows with c_i == 0 (warning), rejects negative data, rows with
  /// c_i > 0 and no nonzeros, and inconsistent sizes. Resolves shell caps.
  static PoissonProblem assemble(Vector s, Vector c, SparseMatrix a, PenaltySpec penalty,
                                 ProximalSetup setup, AssemblyInfo* info = nullptr);

  std::size_t n() const { return s_.size(); }
  std::size_t m() const { return c_.size(); }
  const Vector& s() const { return s_; }
  const Vector& c() const { return c_; }
  const SparseMatrix& a() const { return a_; }
  const PenaltySpec& penalty() const { return penalty_; }
  const ProximalSetup& setup() const { return setup_; }
  /// sum_i c_i (1 - log c_i)
  double c0() const { return c0_; }
  /// sum_i c_i
  double total_count() const { return total_count_; }

 private:
  Vector s_;
  Vector c_;
  SparseMatrix a_;
  PenaltySpec penalty_;
  ProximalSetup setup_;
  double c0_ = 0.0;
  double total_count_ = 0.0;
};

/// f(x) = s^T x - sum c_i log(a_i^T x) + h(x). Throws DomainError if some
/// a_i^T x <= 0 or x has a negative entry.
double objective(const PoissonProblem& p, std::span<const double> x);
/// Same as objective() but returns +inf outside the log domain.
double objective_or_inf(const PoissonProblem& p, std::span<const double> x);

/// Phi(x, y) = s^T x - y^T A x + sum c_i log y_i + h(x) + c0.
double saddle_value(const PoissonProblem& p, std::span<const double> x, std::span<const double> y);

struct OperatorValue {
  Vector g_x;  // s - A^T y
  Vector g_y;  // A x
};
/// Monotone operator of the bilinear coupling phi = s^T x - y^T A x.
OperatorValue monotone_operator(const PoissonProblem& p, std::span<const double> x,
                                std::span<const double> y);

struct NormEstimate {
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = true;
};

/// Largest singular value of rows [r0, r1) of A with columns scaled by
/// col_scale (empty = unscaled), by power iteration on A^T A.
NormEstimate spectral_norm(const SparseMatrix& a, std::size_t r0, std::size_t r1,
                           std::span<const double> col_scale = {}, double rel_tol = 1e-6,
                           std::size_t max_iter = 1000);

/// max_{x >= 0, ||x|| <= 1} ||A x||_2 for the unit-mass, unit-weight norm of
/// the given kind: max column norm (entropy/l1) or spectral norm (Euclidean).
double operator_norm(const SparseMatrix& a, SetupKind kind);

/// Operator norm of rows [r0, r1) w.r.t. the problem's primal norm
/// (block weights and mass bounds included). Infinite if an uncapped
/// entropy block has no finite mass bound.
double operator_norm(const PoissonProblem& p, std::size_t r0, std::size_t r1);
inline double operator_norm(const PoissonProblem& p) { return operator_norm(p, 0, p.m()); }

/// |s^T x + h(x) - sum c_i|; zero at every minimizer.
double mass_identity_residual(const PoissonProblem& p, std::span<const double> x);

/// Start on the mass shell: uniform x with s^T x + h(x) = sum c.
Vector shell_initial_point(const PoissonProblem& p);

// Text problem file: "n m", s (n reals), c (m reals), then "i j value" lines.
struct ProblemData {
  Vector s;
  Vector c;
  SparseMatrix a;
};
ProblemData read_problem_file(const std::string& path);
void write_problem_file(const std::string& path, std::span<const double> s,
                        std::span<const double> c, const SparseMatrix& a);

}  // namespace pmp
