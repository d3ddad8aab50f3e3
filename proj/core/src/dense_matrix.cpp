#include "attrinfer/dense_matrix.hpp"

#include <algorithm>

#include "attrinfer/error.hpp"

namespace attrinfer {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix DenseMatrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n_rows = rows.size();
  const std::size_t n_cols = n_rows == 0 ? 0 : rows.begin()->size();
  DenseMatrix m(n_rows, n_cols);
  std::size_t r = 0;
  for (const auto& row : rows) {
    if (row.size() != n_cols) {
      throw DimensionError("from_rows: ragged row " + std::to_string(r) + " has " +
                           std::to_string(row.size()) + " entries, expected " +
                           std::to_string(n_cols));
    }
    std::copy(row.begin(), row.end(), m.row(r).begin());
    ++r;
  }
  return m;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void DenseMatrix::fill(double value) { std::fill(data_.begin(), data_.end(), value); }

std::string DenseMatrix::shape_string() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

}  // namespace attrinfer
