#include "pmp/pet.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "pmp/rng.hpp"

namespace pmp {

SparseMatrix generate_system_matrix(std::size_t m, std::size_t n, double density, std::uint64_t seed) {
  if (m == 0 || n == 0) throw std::invalid_argument("system matrix needs m, n >= 1");
  if (!(density > 0.0) || density > 1.0 || density * static_cast<double>(m) < 1.0 - 1e-12) {
    throw std::invalid_argument("density must satisfy density * m >= 1 and density <= 1");
  }
  const auto per_col = std::min<std::size_t>(
      m, static_cast<std::size_t>(std::ceil(density * static_cast<double>(m) - 1e-9)));
  CounterRng rng(seed);
  std::vector<std::size_t> pool(m);
  std::vector<Triplet> trip;
  trip.reserve(per_col * n);
  Vector w(per_col);
  for (std::size_t j = 0; j < n; ++j) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    // partial Fisher-Yates: the first per_col slots are a uniform sample
    for (std::size_t k = 0; k < per_col; ++k) {
      const auto r = k + static_cast<std::size_t>(rng.uniform_int(m - k));
      std::swap(pool[k], pool[r]);
    }
    double total = 0.0;
    for (auto& v : w) total += (v = rng.uniform_open());
    for (std::size_t k = 0; k < per_col; ++k) trip.push_back({pool[k], j, w[k] / total});
  }
  return SparseMatrix::from_triplets(m, n, std::move(trip));
}

Vector generate_phantom(std::size_t side) {
  if (side < 8) throw std::invalid_argument("phantom side must be >= 8");
  Vector img(side * side);
  const double mid = 0.5 * static_cast<double>(side - 1);
  const double radius = 0.5 * static_cast<double>(side);
  for (std::size_t r = 0; r < side; ++r) {
    for (std::size_t c = 0; c < side; ++c) {
      const double dr = (static_cast<double>(r) - mid) / radius;
      const double dc = (static_cast<double>(c) - mid) / radius;
      const double rho = std::sqrt(dr * dr + dc * dc);
      double v = 0.05;
      if (rho < 0.3) {
        v = 1.0;
      } else if (rho < 0.6) {
        v = 0.6;
      } else if (rho < 0.9) {
        v = 0.3;
      }
      img[r * side + c] = v;
    }
  }
  return img;
}

Vector simulate_counts(const SparseMatrix& a, const Vector& x_true, CountMode mode, std::uint64_t seed) {
  if (x_true.size() != a.cols()) throw DimensionError("x_true has the wrong length");
  for (double v : x_true) {
    if (!(v >= 0.0)) throw DomainError("x_true must be nonnegative");
  }
  Vector w(a.rows());
  a.multiply(x_true, w);
  if (mode == CountMode::poisson) {
    CounterRng rng(seed);
    for (auto& v : w) v = static_cast<double>(rng.poisson(v));
  }
  return w;
}

PETInstance PETInstance::make(SparseMatrix a, Vector w, std::optional<Vector> x_true, bool noiseless) {
  if (w.size() != a.rows()) throw DimensionError("counts length != detector rows");
  if (x_true && x_true->size() != a.cols()) throw DimensionError("x_true has the wrong length");
  PETInstance inst;
  inst.theta = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(inst.theta > 0.0)) throw DomainError("PET counts must have a positive total");
  inst.a = std::move(a);
  inst.w = std::move(w);
  inst.x_true = std::move(x_true);
  inst.noiseless = noiseless && inst.x_true.has_value();
  return inst;
}

PoissonProblem PETInstance::problem() const {
  return PoissonProblem::assemble(a.column_sums(), w, a, PenaltySpec::none(), ProximalSetup::entropy_exact_mass(theta));
}

std::optional<double> PETInstance::optimal_value() const {
  if (!noiseless || !x_true) return std::nullopt;
  return objective(problem(), *x_true);
}

SolveReport solve_pet(const PETInstance& inst, const SolveOptions& opts) {
  const auto p = inst.problem();
  SolveOptions o = opts;
  o.f_star.reset();
  auto rep = solve_cmp(p, o);
  const auto f_star = opts.f_star ? opts.f_star : inst.optimal_value();
  if (f_star) {
    for (auto& r : rep.history) r.rel_subopt = (r.objective - *f_star) / std::abs(*f_star);
  }
  return rep;
}

Vector read_counts(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  Vector w;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(text);
    double v;
    std::string rest;
    if (!(ls >> v) || (ls >> rest) || !std::isfinite(v) || v < 0.0) {
      throw ParseError(path + ":" + std::to_string(line) + ": expected a nonnegative count");
    }
    w.push_back(v);
  }
  return w;
}

void write_counts(const std::string& path, const Vector& w) {
  std::ostringstream out;
  for (double v : w) out << format_double(v) << '\n';
  write_text_atomic(path, out.str());
}

void write_image_csv(const std::string& path, const Vector& x) {
  std::ostringstream out;
  for (double v : x) out << format_double(v) << '\n';
  write_text_atomic(path, out.str());
}

}  // namespace pmp
