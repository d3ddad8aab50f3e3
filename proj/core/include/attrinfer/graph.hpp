#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/numerics.hpp"
#include "attrinfer/rng.hpp"
#include "attrinfer/sparse_matrix.hpp"

namespace attrinfer {

struct AttributeType {
  std::string name;
  std::vector<std::string> labels;  // label index i + 1 names labels[i]

  std::size_t label_count() const noexcept { return labels.size(); }
};

// Ordered attribute types and their column layout in the feature matrix: each
// type owns one contiguous one-hot block.
class AttributeSchema {
 public:
  AttributeSchema() = default;
  // Throws SchemaError when a type has fewer than two labels or the schema is empty.
  explicit AttributeSchema(std::vector<AttributeType> types);
  // Types named "attr0", "attr1", ... with labels "1".."k".
  static AttributeSchema from_label_counts(std::span<const std::size_t> counts);

  std::size_t type_count() const noexcept { return types_.size(); }
  std::size_t feature_count() const noexcept { return features_; }
  const std::vector<AttributeType>& types() const noexcept { return types_; }
  const AttributeType& type(std::size_t j) const { return types_.at(j); }
  std::size_t label_count(std::size_t j) const { return types_.at(j).label_count(); }
  std::size_t offset(std::size_t j) const { return blocks_.at(j).start; }
  std::span<const ColumnBlock> blocks() const noexcept { return blocks_; }
  std::size_t min_label_count() const;

  // Stable hash of names and labels; checkpoints carry it.
  std::string hash() const;

  friend bool operator==(const AttributeSchema& a, const AttributeSchema& b) {
    return a.hash() == b.hash();
  }

 private:
  std::vector<AttributeType> types_;
  std::vector<ColumnBlock> blocks_;
  std::size_t features_ = 0;
};

struct Edge {
  std::size_t u;
  std::size_t v;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

// Users, undirected edges and per-user labels. a(i, j) == 0 marks a missing
// value, otherwise it is the 1-based label index of type j.
class AttributedGraph {
 public:
  AttributedGraph() = default;
  // Normalizes every edge to u < v and removes duplicates. Throws SchemaError for
  // self-loops, out-of-range endpoints and labels outside a type's range.
  AttributedGraph(std::size_t n_users, std::vector<Edge> edges, AttributeSchema schema,
                  std::vector<int> assignments);

  std::size_t user_count() const noexcept { return n_users_; }
  std::size_t type_count() const noexcept { return schema_.type_count(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const AttributeSchema& schema() const noexcept { return schema_; }
  int label(std::size_t user, std::size_t type) const {
    return assignments_[user * schema_.type_count() + type];
  }
  std::span<const int> assignments() const noexcept { return assignments_; }
  std::size_t observed_cell_count() const;

 private:
  std::size_t n_users_ = 0;
  std::vector<Edge> edges_;
  AttributeSchema schema_;
  std::vector<int> assignments_;
};

// Boolean N×L matrix over (user, attribute-type) cells.
class LabelMask {
 public:
  LabelMask() = default;
  LabelMask(std::size_t n_users, std::size_t n_types)
      : n_users_(n_users), n_types_(n_types), cells_(n_users * n_types, 0) {}

  std::size_t user_count() const noexcept { return n_users_; }
  std::size_t type_count() const noexcept { return n_types_; }
  bool operator()(std::size_t user, std::size_t type) const {
    return cells_[user * n_types_ + type] != 0;
  }
  void set(std::size_t user, std::size_t type, bool visible) {
    cells_[user * n_types_ + type] = visible ? 1 : 0;
  }
  std::size_t count() const;
  bool intersects(const LabelMask& other) const;
  std::uint64_t fingerprint() const;

  friend bool operator==(const LabelMask&, const LabelMask&) = default;

 private:
  std::size_t n_users_ = 0;
  std::size_t n_types_ = 0;
  std::vector<std::uint8_t> cells_;
};

struct LabelSplit {
  LabelMask train;
  LabelMask validation;
  LabelMask test;
};

struct SplitRatios {
  double train = 0.8;
  double validation = 0.1;
  double test = 0.1;
};

// `labeled` holds users whose every attribute is visible in the training view.
struct UserPartition {
  std::vector<std::size_t> labeled;
  std::vector<std::size_t> unlabeled;
};

// N×F one-hot blocks for the cells visible in `train`; every other block is zero.
DenseMatrix build_feature_matrix(const AttributedGraph& g, const LabelMask& train);

// D^{-1/2} (A + I) D^{-1/2} with D the degree of A + I.
SparseMatrix normalize_adjacency(const AttributedGraph& g);

// Shuffles all observed cells and cuts them into train/validation/test by the
// ratios (rounded, test takes the remainder). Throws ConfigError for invalid
// ratios or an empty part.
LabelSplit split_labels(const AttributedGraph& g, const SplitRatios& ratios, Rng& rng);

// Keeps floor(keep_fraction × observed cells) of the training cells, sampled
// without replacement. Validation and test masks are copied unchanged.
// keep_fraction 1 returns the split as is; any other request for more cells
// than the train mask holds throws ConfigError.
LabelSplit sparsify_train_labels(const LabelSplit& split, double keep_fraction, Rng& rng);

// Throws ConfigError when no user is fully visible.
UserPartition partition_users(const AttributedGraph& g, const LabelMask& train);
// Same partition; an empty labeled set is returned rather than rejected.
UserPartition partition_users_unchecked(const AttributedGraph& g, const LabelMask& train);

}  // namespace attrinfer
