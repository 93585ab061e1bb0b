#include "pmp/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "pmp/kernels.hpp"

namespace pmp {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  if (rows > std::numeric_limits<std::uint32_t>::max() ||
      cols > std::numeric_limits<std::uint32_t>::max()) {
    throw DimensionError("matrix dimensions exceed 32-bit index range");
  }
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw DimensionError("entry (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                           ") outside " + std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!std::isfinite(t.value) || t.value < 0.0) {
      throw DomainError("matrix entries must be finite and nonnegative");
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });

  SparseMatrix m;
  m.rows_ = rows;
  m.cols_ = cols;
  m.row_ptr_.assign(rows + 1, 0);
  for (std::size_t k = 0; k < entries.size();) {
    const auto& t = entries[k];
    double v = t.value;
    std::size_t next = k + 1;
    while (next < entries.size() && entries[next].row == t.row && entries[next].col == t.col) {
      v += entries[next].value;
      ++next;
    }
    if (v > 0.0) {
      m.col_idx_.push_back(static_cast<std::uint32_t>(t.col));
      m.values_.push_back(v);
      ++m.row_ptr_[t.row + 1];
    }
    k = next;
  }
  for (std::size_t i = 0; i < rows; ++i) m.row_ptr_[i + 1] += m.row_ptr_[i];

  // column-compressed copy
  m.col_ptr_.assign(cols + 1, 0);
  for (auto j : m.col_idx_) ++m.col_ptr_[j + 1];
  for (std::size_t j = 0; j < cols; ++j) m.col_ptr_[j + 1] += m.col_ptr_[j];
  m.row_idx_.resize(m.values_.size());
  m.col_values_.resize(m.values_.size());
  std::vector<std::size_t> fill(m.col_ptr_.begin(), m.col_ptr_.end() - 1);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t k = m.row_ptr_[i]; k < m.row_ptr_[i + 1]; ++k) {
      const auto pos = fill[m.col_idx_[k]]++;
      m.row_idx_[pos] = static_cast<std::uint32_t>(i);
      m.col_values_[pos] = m.values_[k];
    }
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t));
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> out) const {
  multiply_rows(0, rows_, x, out);
}

void SparseMatrix::multiply_transpose(std::span<const double> y, std::span<double> out) const {
  kernels::CsrView csc{col_ptr_, row_idx_, col_values_};
  kernels::parallel::gather_rows(csc, 0, cols_, y, out);
}

void SparseMatrix::multiply_rows(std::size_t r0, std::size_t r1, std::span<const double> x,
                                 std::span<double> out) const {
  kernels::CsrView csr{row_ptr_, col_idx_, values_};
  kernels::parallel::gather_rows(csr, r0, r1, x, out);
}

void SparseMatrix::add_transpose_rows(std::size_t r0, std::size_t r1, std::span<const double> delta,
                                      std::span<double> out) const {
  for (std::size_t i = r0; i < r1; ++i) {
    const double d = delta[i - r0];
    if (d == 0.0) continue;
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[col_idx_[k]] += values_[k] * d;
  }
}

double SparseMatrix::column_norm(std::size_t j, std::size_t r0, std::size_t r1) const {
  double acc = 0.0;
  for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) {
    const auto i = row_idx_[k];
    if (i >= r0 && i < r1) acc += col_values_[k] * col_values_[k];
  }
  return std::sqrt(acc);
}

double SparseMatrix::max_column_norm(std::size_t c0, std::size_t c1, std::size_t r0,
                                     std::size_t r1) const {
  double best = 0.0;
  for (std::size_t j = c0; j < c1; ++j) best = std::max(best, column_norm(j, r0, r1));
  return best;
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(nnz());
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out.push_back({i, col_idx_[k], values_[k]});
  }
  return out;
}

SparseMatrix SparseMatrix::select_rows(std::span<const std::size_t> keep) const {
  std::vector<Triplet> t;
  for (std::size_t r = 0; r < keep.size(); ++r) {
    const auto i = keep[r];
    if (i >= rows_) throw DimensionError("row selection out of range");
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) t.push_back({r, col_idx_[k], values_[k]});
  }
  return from_triplets(keep.size(), cols_, std::move(t));
}

Vector SparseMatrix::row_sums() const {
  Vector out(rows_, 0.0);
  for (std::size_t i = 0; i < rows_; ++i) {
    for (std::size_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out[i] += values_[k];
  }
  return out;
}

Vector SparseMatrix::column_sums() const {
  Vector out(cols_, 0.0);
  for (std::size_t j = 0; j < cols_; ++j) {
    for (std::size_t k = col_ptr_[j]; k < col_ptr_[j + 1]; ++k) out[j] += col_values_[k];
  }
  return out;
}

}  // namespace pmp
