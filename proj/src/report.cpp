#include "pmp/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace pmp {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_history_csv(std::ostream& out, const std::vector<HistoryRow>& rows,
                       const std::vector<std::string>& comments) {
  for (const auto& c : comments) out << "# " << c << '\n';
  out << "iter,passes,objective,rel_subopt,mass_residual,elapsed_ms\n";
  for (const auto& r : rows) {
    out << r.iteration << ',' << format_double(r.passes) << ',' << format_double(r.objective) << ',';
    if (r.rel_subopt) out << format_double(*r.rel_subopt);
    out << ',' << format_double(r.mass_residual) << ',' << format_double(r.elapsed_ms) << '\n';
  }
}

std::vector<HistoryRow> align_to_pass_grid(const std::vector<HistoryRow>& rows, double step,
                                           double budget) {
  std::vector<HistoryRow> out;
  if (rows.empty() || !(step > 0.0)) return out;
  std::size_t k = 0;
  for (std::size_t g = 1;; ++g) {
    const double grid = step * static_cast<double>(g);
    if (grid > budget * (1.0 + 1e-12)) break;
    // 1e-9 slack absorbs the rounding of fractional RB pass counts
    while (k + 1 < rows.size() && rows[k + 1].passes <= grid + 1e-9) ++k;
    HistoryRow r = rows[k];
    r.passes = grid;
    out.push_back(r);
  }
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::remove(tmp.c_str());
      throw std::runtime_error("write to " + tmp + " failed");
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::remove(tmp.c_str());
    throw std::runtime_error("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

double tuning_score(const std::vector<HistoryRow>& rows, TuneScore score, std::optional<double> pass_budget) {
  if (rows.empty()) return std::numeric_limits<double>::infinity();
  if (score == TuneScore::final_value) return rows.back().objective;
  double acc = 0.0;
  if (pass_budget) {
    for (const auto& r : align_to_pass_grid(rows, *pass_budget / 50.0, *pass_budget)) acc += r.objective;
  } else {
    for (const auto& r : rows) acc += r.objective;
  }
  return acc;
}

void fill_relative_suboptimality(std::vector<HistoryRow>& rows, double f_star) {
  if (rows.empty()) return;
  // a start that is already optimal up to roundoff would make the ratio 0/0
  const double floor = 1.4901161193847656e-08 * std::max(1.0, std::abs(f_star));
  const double denom = std::max(rows.front().objective - f_star, floor);
  for (auto& r : rows) r.rel_subopt = (r.objective - f_star) / denom;
}

}  // namespace pmp
