#include "attrinfer/sparse_matrix.hpp"

#include <algorithm>
#include <string>

#include "attrinfer/error.hpp"

namespace attrinfer {

SparseMatrix SparseMatrix::from_triplets(std::size_t rows, std::size_t cols,
                                         std::vector<Triplet> entries) {
  for (const auto& t : entries) {
    if (t.row >= rows || t.col >= cols) {
      throw DimensionError("sparse entry (" + std::to_string(t.row) + ", " +
                           std::to_string(t.col) + ") outside " + std::to_string(rows) + "x" +
                           std::to_string(cols));
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      throw ConfigError("duplicate sparse coordinate (" + std::to_string(entries[k].row) + ", " +
                        std::to_string(entries[k].col) + ")");
    }
  }

  SparseMatrix s;
  s.rows_ = rows;
  s.cols_ = cols;
  s.row_offsets_.assign(rows + 1, 0);
  s.col_indices_.reserve(entries.size());
  s.values_.reserve(entries.size());
  for (const auto& t : entries) {
    ++s.row_offsets_[t.row + 1];
    s.col_indices_.push_back(t.col);
    s.values_.push_back(t.value);
  }
  for (std::size_t r = 0; r < rows; ++r) s.row_offsets_[r + 1] += s.row_offsets_[r];
  return s;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> entries;
  entries.reserve(n);
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(entries));
}

double SparseMatrix::at(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) {
    throw DimensionError("sparse index (" + std::to_string(r) + ", " + std::to_string(c) +
                         ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_));
  }
  auto first = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r]);
  auto last = col_indices_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[r + 1]);
  auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - col_indices_.begin())];
}

std::vector<Triplet> SparseMatrix::triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      out.push_back({r, col_indices_[k], values_[k]});
    }
  }
  return out;
}

DenseMatrix SparseMatrix::densify() const {
  DenseMatrix d(rows_, cols_);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      d(r, col_indices_[k]) = values_[k];
    }
  }
  return d;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> entries = triplets();
  for (auto& t : entries) std::swap(t.row, t.col);
  return from_triplets(cols_, rows_, std::move(entries));
}

bool SparseMatrix::is_symmetric() const {
  if (rows_ != cols_) return false;
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t k = row_offsets_[r]; k < row_offsets_[r + 1]; ++k) {
      if (at(col_indices_[k], r) != values_[k]) return false;
    }
  }
  return true;
}

}  // namespace attrinfer
