#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/sparse_matrix.hpp"

namespace attrinfer {

// Half-open column range [start, end).
struct ColumnBlock {
  std::size_t start;
  std::size_t end;

  std::size_t width() const noexcept { return end - start; }
  friend bool operator==(const ColumnBlock&, const ColumnBlock&) = default;
};

enum class Elementwise { relu, sigmoid, exp, log };

// Products. All reductions run over ascending indices so results are bitwise
// reproducible. Shape mismatches throw DimensionError naming both shapes.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
// aᵀ · b
DenseMatrix matmul_transpose_a(const DenseMatrix& a, const DenseMatrix& b);
// a · bᵀ
DenseMatrix matmul_transpose_b(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix sparse_dense_matmul(const SparseMatrix& s, const DenseMatrix& d);
// sᵀ · d without materializing the transpose.
DenseMatrix sparse_transpose_dense_matmul(const SparseMatrix& s, const DenseMatrix& d);

DenseMatrix transpose(const DenseMatrix& m);

// Applies the op to every entry. log throws DomainError on the first
// non-positive entry, naming its coordinates.
DenseMatrix apply(Elementwise op, const DenseMatrix& m);
// Gradient of `apply(op, input)` given the upstream gradient. `output` is the
// forward result. The relu derivative at exactly zero is zero.
DenseMatrix apply_backward(Elementwise op, const DenseMatrix& input, const DenseMatrix& output,
                           const DenseMatrix& grad_output);

// In-place helpers used by the layer code.
void add_in_place(DenseMatrix& target, const DenseMatrix& other);
void scaled_add_in_place(DenseMatrix& target, double scale, const DenseMatrix& other);
void scale_in_place(DenseMatrix& target, double scale);
// Adds the 1×cols row vector `bias` to every row.
void add_row_vector(DenseMatrix& target, const DenseMatrix& bias);
// 1×cols sums of each column.
DenseMatrix column_sums(const DenseMatrix& m);
// Zeroes grad entries wherever `activation` is not strictly positive.
void relu_mask_in_place(DenseMatrix& grad, const DenseMatrix& activation);
DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b);

// Rows [first..] gathered in the given order, and the inverse scatter-add.
DenseMatrix gather_rows(const DenseMatrix& m, std::span<const std::size_t> rows);
void scatter_add_rows(DenseMatrix& target, std::span<const std::size_t> rows,
                      const DenseMatrix& source);
// Columns [start, end) of every row.
DenseMatrix slice_columns(const DenseMatrix& m, std::size_t start, std::size_t end);
DenseMatrix concat_columns(const DenseMatrix& left, const DenseMatrix& right);

// Throws SchemaError unless the blocks tile [0, cols) in order without gaps or
// overlap.
void validate_blocks(std::span<const ColumnBlock> blocks, std::size_t cols);

// Per-row softmax restricted to each column block.
DenseMatrix softmax_blocks(const DenseMatrix& logits, std::span<const ColumnBlock> blocks);
// Gradient w.r.t. the logits given the softmax output and the upstream gradient.
DenseMatrix softmax_blocks_backward(const DenseMatrix& probs, const DenseMatrix& grad_probs,
                                    std::span<const ColumnBlock> blocks);

// log(Σ exp(v)) computed around the maximum.
double log_sum_exp(std::span<const double> values);

bool all_finite(const DenseMatrix& m);
double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b);

}  // namespace attrinfer
