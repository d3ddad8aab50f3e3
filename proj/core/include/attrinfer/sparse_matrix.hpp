#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attrinfer/dense_matrix.hpp"

namespace attrinfer {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed sparse row matrix. Built from coordinate triplets; rows keep their
// column indices sorted ascending so every reduction has a fixed order.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Throws DimensionError for out-of-range coordinates and ConfigError for
  // duplicate (row, col) keys.
  static SparseMatrix from_triplets(std::size_t rows, std::size_t cols,
                                    std::vector<Triplet> entries);
  static SparseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  std::span<const std::size_t> row_offsets() const noexcept { return row_offsets_; }
  std::span<const std::size_t> col_indices() const noexcept { return col_indices_; }
  std::span<const double> values() const noexcept { return values_; }

  // Stored value at (r, c), zero when absent.
  double at(std::size_t r, std::size_t c) const;

  std::vector<Triplet> triplets() const;
  DenseMatrix densify() const;
  SparseMatrix transpose() const;

  // Exact structural and numerical symmetry.
  bool is_symmetric() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<std::size_t> col_indices_;
  std::vector<double> values_;
};

}  // namespace attrinfer
