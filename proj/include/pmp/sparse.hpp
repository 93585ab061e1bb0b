#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "pmp/common.hpp"

namespace pmp {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
  bool operator==(const Triplet&) const = default;
};

/// Nonnegative sparse matrix stored in compressed-row form, with a
/// compressed-column copy so that both A x and A^T y are gather loops.
/// Immutable once assembled.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  /// Duplicate (row, col) pairs are summed; explicit zeros are dropped.
  /// Throws DimensionError for out-of-range indices and DomainError for
  /// negative or non-finite values.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nnz() const { return values_.size(); }

  // out = A x
  void multiply(std::span<const double> x, std::span<double> out) const;
  // out = A^T y
  void multiply_transpose(std::span<const double> y, std::span<double> out) const;
  // out[i - r0] = a_i^T x for i in [r0, r1)
  void multiply_rows(std::size_t r0, std::size_t r1, std::span<const double> x,
                     std::span<double> out) const;
  // out += A_{r0:r1}^T delta, delta indexed from r0
  void add_transpose_rows(std::size_t r0, std::size_t r1, std::span<const double> delta,
                          std::span<double> out) const;

  /// Euclidean norm of column j restricted to rows [r0, r1).
  double column_norm(std::size_t j, std::size_t r0, std::size_t r1) const;
  /// max over columns in [c0, c1) of the column norm restricted to rows [r0, r1).
  double max_column_norm(std::size_t c0, std::size_t c1, std::size_t r0, std::size_t r1) const;

  std::vector<Triplet> triplets() const;
  /// Rows listed in `keep`, in that order.
  SparseMatrix select_rows(std::span<const std::size_t> keep) const;
  Vector row_sums() const;
  Vector column_sums() const;
  bool row_empty(std::size_t i) const { return row_ptr_[i] == row_ptr_[i + 1]; }

  std::span<const std::size_t> row_ptr() const { return row_ptr_; }
  std::span<const std::uint32_t> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }
  std::span<const std::size_t> col_ptr() const { return col_ptr_; }
  std::span<const std::uint32_t> row_idx() const { return row_idx_; }
  std::span<const double> col_values() const { return col_values_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::uint32_t> col_idx_;
  std::vector<double> values_;
  std::vector<std::size_t> col_ptr_{0};
  std::vector<std::uint32_t> row_idx_;
  std::vector<double> col_values_;
};

}  // namespace pmp
