#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/graph.hpp"

namespace attrinfer {

// N×L predicted labels, 1-based, row-major.
struct LabelMatrix {
  std::size_t n_users = 0;
  std::size_t n_types = 0;
  std::vector<int> labels;

  int operator()(std::size_t user, std::size_t type) const { return labels[user * n_types + type]; }
};

// Confusion counts for one attribute label, counted over test cells.
struct LabelCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
};

struct AccuracyResult {
  double accuracy_cell = 0.0;   // correct test cells / test cells
  double accuracy_label = 0.0;   // (TP + TN) / (TP + TN + FP + FN) at label granularity
  std::vector<LabelCounts> counts;  // one per feature column (global label index)
  std::size_t test_cells = 0;
  std::size_t correct_cells = 0;
};

struct MetricsReport {
  double accuracy_cell = 0.0;
  double accuracy_label = 0.0;
  double macro_f1 = 0.0;
  std::map<std::string, double> per_attribute_accuracy;
  std::vector<LabelCounts> counts;
  std::vector<double> precision;  // per label; 0 when TP + FP = 0
  std::vector<double> recall;     // per label; 0 when TP + FN = 0
  std::size_t test_cells = 0;
};

// Per-block argmax, ties to the lowest label.
LabelMatrix predict_labels(const DenseMatrix& x_hat, const AttributeSchema& schema);

// `truth` is the graph's assignment table. A correct cell adds one TP and
// (k - 1) TN; a wrong one adds one FP, one FN and (k - 2) TN. Throws
// ConfigError for an empty mask and SchemaError if the mask selects a cell
// with no known label.
AccuracyResult accuracy(const LabelMatrix& predictions, const AttributedGraph& truth,
                        const LabelMask& mask);

// Mean F1 over labels that occur in the evaluated cells (TP + FN > 0).
double macro_f1(std::span<const LabelCounts> counts);

// accuracy_cell per attribute type; types without evaluated cells are absent.
std::map<std::string, double> per_attribute_accuracy(const LabelMatrix& predictions,
                                                     const AttributedGraph& truth,
                                                     const LabelMask& mask);

MetricsReport evaluate_predictions(const DenseMatrix& x_hat, const AttributedGraph& truth,
                                   const LabelMask& mask);

}  // namespace attrinfer
