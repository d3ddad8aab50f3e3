#include "attrinfer/metrics.hpp"

#include <string>

#include "attrinfer/error.hpp"

namespace attrinfer {
namespace {

void require_compatible(const LabelMatrix& predictions, const AttributedGraph& truth,
                        const LabelMask& mask) {
  if (predictions.n_users != truth.user_count() || predictions.n_types != truth.type_count() ||
      mask.user_count() != truth.user_count() || mask.type_count() != truth.type_count()) {
    throw DimensionError("predictions, truth and mask must all be " +
                         std::to_string(truth.user_count()) + "x" +
                         std::to_string(truth.type_count()));
  }
}

int known_label(const AttributedGraph& truth, std::size_t i, std::size_t j) {
  const int t = truth.label(i, j);
  if (t == 0) {
    throw SchemaError("evaluation mask selects user " + std::to_string(i) + " attribute '" +
                      truth.schema().type(j).name + "' which has no known label");
  }
  return t;
}

}  // namespace

LabelMatrix predict_labels(const DenseMatrix& x_hat, const AttributeSchema& schema) {
  if (x_hat.cols() != schema.feature_count()) {
    throw DimensionError("predict_labels: " + x_hat.shape_string() + " does not have " +
                         std::to_string(schema.feature_count()) + " columns");
  }
  LabelMatrix out{x_hat.rows(), schema.type_count(), std::vector<int>(x_hat.rows() * schema.type_count())};
  for (std::size_t i = 0; i < x_hat.rows(); ++i) {
    for (std::size_t j = 0; j < schema.type_count(); ++j) {
      const ColumnBlock block = schema.blocks()[j];
      std::size_t best = block.start;
      for (std::size_t c = block.start + 1; c < block.end; ++c) {
        if (x_hat(i, c) > x_hat(i, best)) best = c;
      }
      out.labels[i * schema.type_count() + j] = static_cast<int>(best - block.start + 1);
    }
  }
  return out;
}

AccuracyResult accuracy(const LabelMatrix& predictions, const AttributedGraph& truth,
                        const LabelMask& mask) {
  require_compatible(predictions, truth, mask);
  const AttributeSchema& schema = truth.schema();
  AccuracyResult r;
  r.counts.resize(schema.feature_count());
  for (std::size_t i = 0; i < truth.user_count(); ++i) {
    for (std::size_t j = 0; j < truth.type_count(); ++j) {
      if (!mask(i, j)) continue;
      const int t = known_label(truth, i, j);
      const int p = predictions(i, j);
      const std::size_t offset = schema.offset(j);
      const std::size_t k = schema.label_count(j);
      ++r.test_cells;
      for (std::size_t l = 1; l <= k; ++l) {
        LabelCounts& c = r.counts[offset + l - 1];
        const bool is_true = static_cast<int>(l) == t;
        const bool is_pred = static_cast<int>(l) == p;
        if (is_true && is_pred) {
          ++c.tp;
        } else if (is_true) {
          ++c.fn;
        } else if (is_pred) {
          ++c.fp;
        } else {
          ++c.tn;
        }
      }
      if (p == t) ++r.correct_cells;
    }
  }
  if (r.test_cells == 0) throw ConfigError("accuracy: the evaluation mask is empty");
  std::size_t tp_tn = 0;
  std::size_t all = 0;
  for (const auto& c : r.counts) {
    tp_tn += c.tp + c.tn;
    all += c.tp + c.tn + c.fp + c.fn;
  }
  r.accuracy_cell = static_cast<double>(r.correct_cells) / static_cast<double>(r.test_cells);
  r.accuracy_label = static_cast<double>(tp_tn) / static_cast<double>(all);
  return r;
}

double macro_f1(std::span<const LabelCounts> counts) {
  double total = 0.0;
  std::size_t qualifying = 0;
  for (const auto& c : counts) {
    if (c.tp + c.fn == 0) continue;
    ++qualifying;
    const double precision =
        c.tp + c.fp == 0 ? 0.0 : static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    const double recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    if (precision + recall > 0.0) total += 2.0 * precision * recall / (precision + recall);
  }
  if (qualifying == 0) throw ConfigError("macro_f1: no label occurs in the evaluated cells");
  return total / static_cast<double>(qualifying);
}

std::map<std::string, double> per_attribute_accuracy(const LabelMatrix& predictions,
                                                     const AttributedGraph& truth,
                                                     const LabelMask& mask) {
  require_compatible(predictions, truth, mask);
  std::map<std::string, double> out;
  for (std::size_t j = 0; j < truth.type_count(); ++j) {
    std::size_t cells = 0;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < truth.user_count(); ++i) {
      if (!mask(i, j)) continue;
      ++cells;
      if (predictions(i, j) == known_label(truth, i, j)) ++correct;
    }
    if (cells > 0) {
      out[truth.schema().type(j).name] = static_cast<double>(correct) / static_cast<double>(cells);
    }
  }
  return out;
}

MetricsReport evaluate_predictions(const DenseMatrix& x_hat, const AttributedGraph& truth,
                                   const LabelMask& mask) {
  const LabelMatrix predictions = predict_labels(x_hat, truth.schema());
  AccuracyResult acc = accuracy(predictions, truth, mask);
  MetricsReport report;
  report.accuracy_cell = acc.accuracy_cell;
  report.accuracy_label = acc.accuracy_label;
  report.macro_f1 = macro_f1(acc.counts);
  report.per_attribute_accuracy = per_attribute_accuracy(predictions, truth, mask);
  report.test_cells = acc.test_cells;
  for (const auto& c : acc.counts) {
    report.precision.push_back(c.tp + c.fp == 0 ? 0.0
                                                : static_cast<double>(c.tp) /
                                                      static_cast<double>(c.tp + c.fp));
    report.recall.push_back(c.tp + c.fn == 0 ? 0.0
                                             : static_cast<double>(c.tp) /
                                                   static_cast<double>(c.tp + c.fn));
  }
  report.counts = std::move(acc.counts);
  return report;
}

}  // namespace attrinfer
