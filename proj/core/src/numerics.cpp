#include "attrinfer/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "attrinfer/error.hpp"

namespace attrinfer {
namespace {

[[noreturn]] void shape_error(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  throw DimensionError(std::string(op) + ": incompatible shapes " + a.shape_string() + " and " +
                       b.shape_string());
}

void require_same_shape(const char* op, const DenseMatrix& a, const DenseMatrix& b) {
  if (!a.same_shape(b)) shape_error(op, a, b);
}

}  // namespace

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.rows()) shape_error("matmul", a, b);
  DenseMatrix c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  // i-k-j order: the inner loop is contiguous and every c(i, j) accumulates over
  // k in ascending order.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out = c.row(i).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* brow = b.row(k).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += aik * brow[j];
    }
  }
  return c;
}

DenseMatrix matmul_transpose_a(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows()) shape_error("matmul_transpose_a", a, b);
  DenseMatrix c(a.cols(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* brow = b.row(k).data();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a(k, i);
      if (aki == 0.0) continue;
      double* out = c.row(i).data();
      for (std::size_t j = 0; j < n; ++j) out[j] += aki * brow[j];
    }
  }
  return c;
}

DenseMatrix matmul_transpose_b(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() != b.cols()) shape_error("matmul_transpose_b", a, b);
  return matmul(a, transpose(b));
}

DenseMatrix sparse_dense_matmul(const SparseMatrix& s, const DenseMatrix& d) {
  if (s.cols() != d.rows()) {
    throw DimensionError("sparse_dense_matmul: incompatible shapes " + std::to_string(s.rows()) +
                         "x" + std::to_string(s.cols()) + " and " + d.shape_string());
  }
  DenseMatrix out(s.rows(), d.cols());
  const auto offsets = s.row_offsets();
  const auto cols = s.col_indices();
  const auto vals = s.values();
  const std::size_t n = d.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    double* dst = out.row(r).data();
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      const double v = vals[k];
      const double* src = d.row(cols[k]).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix sparse_transpose_dense_matmul(const SparseMatrix& s, const DenseMatrix& d) {
  if (s.rows() != d.rows()) {
    throw DimensionError("sparse_transpose_dense_matmul: incompatible shapes " +
                         std::to_string(s.rows()) + "x" + std::to_string(s.cols()) + " and " +
                         d.shape_string());
  }
  DenseMatrix out(s.cols(), d.cols());
  const auto offsets = s.row_offsets();
  const auto cols = s.col_indices();
  const auto vals = s.values();
  const std::size_t n = d.cols();
  for (std::size_t r = 0; r < s.rows(); ++r) {
    const double* src = d.row(r).data();
    for (std::size_t k = offsets[r]; k < offsets[r + 1]; ++k) {
      const double v = vals[k];
      double* dst = out.row(cols[k]).data();
      for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
    }
  }
  return out;
}

DenseMatrix transpose(const DenseMatrix& m) {
  DenseMatrix t(m.cols(), m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) t(c, r) = m(r, c);
  }
  return t;
}

DenseMatrix apply(Elementwise op, const DenseMatrix& m) {
  DenseMatrix out(m.rows(), m.cols());
  auto src = m.values();
  auto dst = out.values();
  switch (op) {
    case Elementwise::relu:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = src[i] > 0.0 ? src[i] : 0.0;
      break;
    case Elementwise::sigmoid:
      for (std::size_t i = 0; i < src.size(); ++i) {
        const double x = src[i];
        // Branch keeps exp() from overflowing for large |x|.
        if (x >= 0.0) {
          dst[i] = 1.0 / (1.0 + std::exp(-x));
        } else {
          const double e = std::exp(x);
          dst[i] = e / (1.0 + e);
        }
      }
      break;
    case Elementwise::exp:
      for (std::size_t i = 0; i < src.size(); ++i) dst[i] = std::exp(src[i]);
      break;
    case Elementwise::log:
      for (std::size_t i = 0; i < src.size(); ++i) {
        if (!(src[i] > 0.0)) {
          throw DomainError("log of non-positive entry " + std::to_string(src[i]) + " at (" +
                            std::to_string(i / m.cols()) + ", " + std::to_string(i % m.cols()) +
                            ")");
        }
        dst[i] = std::log(src[i]);
      }
      break;
  }
  return out;
}

DenseMatrix apply_backward(Elementwise op, const DenseMatrix& input, const DenseMatrix& output,
                           const DenseMatrix& grad_output) {
  require_same_shape("apply_backward", input, grad_output);
  require_same_shape("apply_backward", output, grad_output);
  DenseMatrix grad(input.rows(), input.cols());
  auto x = input.values();
  auto y = output.values();
  auto g = grad_output.values();
  auto dst = grad.values();
  for (std::size_t i = 0; i < x.size(); ++i) {
    switch (op) {
      case Elementwise::relu:
        dst[i] = x[i] > 0.0 ? g[i] : 0.0;
        break;
      case Elementwise::sigmoid:
        dst[i] = g[i] * y[i] * (1.0 - y[i]);
        break;
      case Elementwise::exp:
        dst[i] = g[i] * y[i];
        break;
      case Elementwise::log:
        dst[i] = g[i] / x[i];
        break;
    }
  }
  return grad;
}

void add_in_place(DenseMatrix& target, const DenseMatrix& other) {
  require_same_shape("add", target, other);
  auto t = target.values();
  auto o = other.values();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += o[i];
}

void scaled_add_in_place(DenseMatrix& target, double scale, const DenseMatrix& other) {
  require_same_shape("scaled_add", target, other);
  auto t = target.values();
  auto o = other.values();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] += scale * o[i];
}

void scale_in_place(DenseMatrix& target, double scale) {
  for (double& v : target.values()) v *= scale;
}

void add_row_vector(DenseMatrix& target, const DenseMatrix& bias) {
  if (bias.rows() != 1 || bias.cols() != target.cols()) shape_error("add_row_vector", target, bias);
  const double* b = bias.row(0).data();
  for (std::size_t r = 0; r < target.rows(); ++r) {
    double* row = target.row(r).data();
    for (std::size_t c = 0; c < target.cols(); ++c) row[c] += b[c];
  }
}

DenseMatrix column_sums(const DenseMatrix& m) {
  DenseMatrix sums(1, m.cols());
  double* out = sums.row(0).data();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double* row = m.row(r).data();
    for (std::size_t c = 0; c < m.cols(); ++c) out[c] += row[c];
  }
  return sums;
}

void relu_mask_in_place(DenseMatrix& grad, const DenseMatrix& activation) {
  require_same_shape("relu_mask", grad, activation);
  auto g = grad.values();
  auto a = activation.values();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!(a[i] > 0.0)) g[i] = 0.0;
  }
}

DenseMatrix hadamard(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape("hadamard", a, b);
  DenseMatrix out(a.rows(), a.cols());
  auto x = a.values();
  auto y = b.values();
  auto dst = out.values();
  for (std::size_t i = 0; i < x.size(); ++i) dst[i] = x[i] * y[i];
  return out;
}

DenseMatrix gather_rows(const DenseMatrix& m, std::span<const std::size_t> rows) {
  DenseMatrix out(rows.size(), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= m.rows()) {
      throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " outside " +
                           m.shape_string());
    }
    std::copy_n(m.row(rows[i]).begin(), m.cols(), out.row(i).begin());
  }
  return out;
}

void scatter_add_rows(DenseMatrix& target, std::span<const std::size_t> rows,
                      const DenseMatrix& source) {
  if (source.rows() != rows.size() || source.cols() != target.cols()) {
    shape_error("scatter_add_rows", target, source);
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto dst = target.row(rows[i]);
    auto src = source.row(i);
    for (std::size_t c = 0; c < dst.size(); ++c) dst[c] += src[c];
  }
}

DenseMatrix slice_columns(const DenseMatrix& m, std::size_t start, std::size_t end) {
  if (start > end || end > m.cols()) {
    throw DimensionError("slice_columns: [" + std::to_string(start) + ", " + std::to_string(end) +
                         ") outside " + m.shape_string());
  }
  DenseMatrix out(m.rows(), end - start);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    std::copy_n(m.row(r).begin() + static_cast<std::ptrdiff_t>(start), end - start,
                out.row(r).begin());
  }
  return out;
}

DenseMatrix concat_columns(const DenseMatrix& left, const DenseMatrix& right) {
  if (left.rows() != right.rows()) shape_error("concat_columns", left, right);
  DenseMatrix out(left.rows(), left.cols() + right.cols());
  for (std::size_t r = 0; r < left.rows(); ++r) {
    auto dst = out.row(r);
    std::copy_n(left.row(r).begin(), left.cols(), dst.begin());
    std::copy_n(right.row(r).begin(), right.cols(),
                dst.begin() + static_cast<std::ptrdiff_t>(left.cols()));
  }
  return out;
}

void validate_blocks(std::span<const ColumnBlock> blocks, std::size_t cols) {
  std::size_t expected = 0;
  for (const auto& b : blocks) {
    if (b.start != expected || b.end <= b.start) {
      throw SchemaError("column blocks must tile [0, " + std::to_string(cols) +
                        ") in order; got block [" + std::to_string(b.start) + ", " +
                        std::to_string(b.end) + ") where start " + std::to_string(expected) +
                        " was expected");
    }
    expected = b.end;
  }
  if (expected != cols) {
    throw SchemaError("column blocks cover [0, " + std::to_string(expected) + ") but matrix has " +
                      std::to_string(cols) + " columns");
  }
}

DenseMatrix softmax_blocks(const DenseMatrix& logits, std::span<const ColumnBlock> blocks) {
  validate_blocks(blocks, logits.cols());
  DenseMatrix out(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    const double* in = logits.row(r).data();
    double* dst = out.row(r).data();
    for (const auto& b : blocks) {
      double peak = in[b.start];
      for (std::size_t c = b.start + 1; c < b.end; ++c) peak = std::max(peak, in[c]);
      double total = 0.0;
      for (std::size_t c = b.start; c < b.end; ++c) {
        dst[c] = std::exp(in[c] - peak);
        total += dst[c];
      }
      for (std::size_t c = b.start; c < b.end; ++c) dst[c] /= total;
    }
  }
  return out;
}

DenseMatrix softmax_blocks_backward(const DenseMatrix& probs, const DenseMatrix& grad_probs,
                                    std::span<const ColumnBlock> blocks) {
  require_same_shape("softmax_blocks_backward", probs, grad_probs);
  validate_blocks(blocks, probs.cols());
  DenseMatrix grad(probs.rows(), probs.cols());
  for (std::size_t r = 0; r < probs.rows(); ++r) {
    const double* p = probs.row(r).data();
    const double* g = grad_probs.row(r).data();
    double* dst = grad.row(r).data();
    for (const auto& b : blocks) {
      double dot = 0.0;
      for (std::size_t c = b.start; c < b.end; ++c) dot += p[c] * g[c];
      for (std::size_t c = b.start; c < b.end; ++c) dst[c] = p[c] * (g[c] - dot);
    }
  }
  return grad;
}

double log_sum_exp(std::span<const double> values) {
  if (values.empty()) return -std::numeric_limits<double>::infinity();
  double peak = values[0];
  for (double v : values) peak = std::max(peak, v);
  double total = 0.0;
  for (double v : values) total += std::exp(v - peak);
  return peak + std::log(total);
}

bool all_finite(const DenseMatrix& m) {
  for (double v : m.values()) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

double max_abs_difference(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape("max_abs_difference", a, b);
  double worst = 0.0;
  auto x = a.values();
  auto y = b.values();
  for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]));
  return worst;
}

}  // namespace attrinfer
