#include "attrinfer/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "attrinfer/error.hpp"
#include "attrinfer/fingerprint.hpp"

namespace attrinfer {

AttributeSchema::AttributeSchema(std::vector<AttributeType> types) : types_(std::move(types)) {
  if (types_.empty()) throw SchemaError("schema declares no attribute types");
  std::size_t offset = 0;
  for (const auto& t : types_) {
    if (t.label_count() < 2) {
      throw SchemaError("attribute '" + t.name + "' has " + std::to_string(t.label_count()) +
                        " labels; at least 2 are required");
    }
    blocks_.push_back({offset, offset + t.label_count()});
    offset += t.label_count();
  }
  features_ = offset;
}

AttributeSchema AttributeSchema::from_label_counts(std::span<const std::size_t> counts) {
  std::vector<AttributeType> types;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    AttributeType t{"attr" + std::to_string(j), {}};
    for (std::size_t k = 1; k <= counts[j]; ++k) t.labels.push_back(std::to_string(k));
    types.push_back(std::move(t));
  }
  return AttributeSchema(std::move(types));
}

std::size_t AttributeSchema::min_label_count() const {
  std::size_t smallest = types_.empty() ? 0 : types_.front().label_count();
  for (const auto& t : types_) smallest = std::min(smallest, t.label_count());
  return smallest;
}

std::string AttributeSchema::hash() const {
  Fingerprint fp;
  fp.number(types_.size());
  for (const auto& t : types_) {
    fp.text(t.name);
    fp.number(t.labels.size());
    for (const auto& l : t.labels) fp.text(l);
  }
  return fp.hex();
}

AttributedGraph::AttributedGraph(std::size_t n_users, std::vector<Edge> edges,
                                 AttributeSchema schema, std::vector<int> assignments)
    : n_users_(n_users), schema_(std::move(schema)), assignments_(std::move(assignments)) {
  const std::size_t n_types = schema_.type_count();
  if (assignments_.size() != n_users_ * n_types) {
    throw SchemaError("assignment table has " + std::to_string(assignments_.size()) +
                      " cells, expected " + std::to_string(n_users_) + " users x " +
                      std::to_string(n_types) + " attributes");
  }
  for (std::size_t i = 0; i < n_users_; ++i) {
    for (std::size_t j = 0; j < n_types; ++j) {
      const int a = assignments_[i * n_types + j];
      if (a < 0 || static_cast<std::size_t>(a) > schema_.label_count(j)) {
        throw SchemaError("user " + std::to_string(i) + " has label " + std::to_string(a) +
                          " for attribute '" + schema_.type(j).name + "' which has " +
                          std::to_string(schema_.label_count(j)) + " labels");
      }
    }
  }
  for (auto& e : edges) {
    if (e.u >= n_users_ || e.v >= n_users_) {
      throw SchemaError("edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                        ") references a user outside [0, " + std::to_string(n_users_) + ")");
    }
    if (e.u == e.v) throw SchemaError("self-loop on user " + std::to_string(e.u));
    if (e.u > e.v) std::swap(e.u, e.v);
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
}

std::size_t AttributedGraph::observed_cell_count() const {
  return static_cast<std::size_t>(
      std::count_if(assignments_.begin(), assignments_.end(), [](int a) { return a != 0; }));
}

std::size_t LabelMask::count() const {
  return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), std::uint8_t{1}));
}

bool LabelMask::intersects(const LabelMask& other) const {
  if (other.n_users_ != n_users_ || other.n_types_ != n_types_) {
    throw DimensionError("label masks have different shapes");
  }
  for (std::size_t k = 0; k < cells_.size(); ++k) {
    if (cells_[k] && other.cells_[k]) return true;
  }
  return false;
}

std::uint64_t LabelMask::fingerprint() const {
  return Fingerprint().number(n_users_).number(n_types_).flags(cells_).value();
}

namespace {

void require_mask_shape(const AttributedGraph& g, const LabelMask& mask) {
  if (mask.user_count() != g.user_count() || mask.type_count() != g.type_count()) {
    throw DimensionError("mask is " + std::to_string(mask.user_count()) + "x" +
                         std::to_string(mask.type_count()) + " but graph has " +
                         std::to_string(g.user_count()) + " users x " +
                         std::to_string(g.type_count()) + " attributes");
  }
}

}  // namespace

DenseMatrix build_feature_matrix(const AttributedGraph& g, const LabelMask& train) {
  require_mask_shape(g, train);
  const AttributeSchema& schema = g.schema();
  DenseMatrix x(g.user_count(), schema.feature_count());
  for (std::size_t i = 0; i < g.user_count(); ++i) {
    for (std::size_t j = 0; j < schema.type_count(); ++j) {
      const int a = g.label(i, j);
      if (a == 0 || !train(i, j)) continue;
      x(i, schema.offset(j) + static_cast<std::size_t>(a - 1)) = 1.0;
    }
  }
  return x;
}

SparseMatrix normalize_adjacency(const AttributedGraph& g) {
  const std::size_t n = g.user_count();
  std::vector<double> degree(n, 1.0);
  for (const auto& e : g.edges()) {
    degree[e.u] += 1.0;
    degree[e.v] += 1.0;
  }
  std::vector<double> inv_sqrt(n);
  for (std::size_t i = 0; i < n; ++i) inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);

  std::vector<Triplet> entries;
  entries.reserve(n + 2 * g.edges().size());
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, inv_sqrt[i] * inv_sqrt[i]});
  for (const auto& e : g.edges()) {
    const double w = inv_sqrt[e.u] * inv_sqrt[e.v];
    entries.push_back({e.u, e.v, w});
    entries.push_back({e.v, e.u, w});
  }
  return SparseMatrix::from_triplets(n, n, std::move(entries));
}

namespace {

struct Cell {
  std::size_t user;
  std::size_t type;
};

std::size_t rounded_share(double ratio, std::size_t total) {
  return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(total)));
}

}  // namespace

LabelSplit split_labels(const AttributedGraph& g, const SplitRatios& ratios, Rng& rng) {
  if (!(ratios.train > 0.0) || !(ratios.validation > 0.0) || !(ratios.test > 0.0)) {
    throw ConfigError("split ratios must all be positive");
  }
  if (std::abs(ratios.train + ratios.validation + ratios.test - 1.0) > 1e-9) {
    throw ConfigError("split ratios must sum to 1");
  }
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < g.user_count(); ++i) {
    for (std::size_t j = 0; j < g.type_count(); ++j) {
      if (g.label(i, j) != 0) cells.push_back({i, j});
    }
  }
  rng.shuffle(cells);

  const std::size_t total = cells.size();
  const std::size_t n_train = std::min(rounded_share(ratios.train, total), total);
  const std::size_t n_val = std::min(rounded_share(ratios.validation, total), total - n_train);
  const std::size_t n_test = total - n_train - n_val;
  if (n_train == 0 || n_val == 0 || n_test == 0) {
    throw ConfigError("split of " + std::to_string(total) + " observed cells leaves a part empty (" +
                      std::to_string(n_train) + "/" + std::to_string(n_val) + "/" +
                      std::to_string(n_test) + ")");
  }

  LabelSplit split{LabelMask(g.user_count(), g.type_count()),
                   LabelMask(g.user_count(), g.type_count()),
                   LabelMask(g.user_count(), g.type_count())};
  for (std::size_t k = 0; k < total; ++k) {
    LabelMask& target = k < n_train ? split.train : (k < n_train + n_val ? split.validation : split.test);
    target.set(cells[k].user, cells[k].type, true);
  }
  return split;
}

LabelSplit sparsify_train_labels(const LabelSplit& split, double keep_fraction, Rng& rng) {
  if (!(keep_fraction > 0.0) || keep_fraction > 1.0) {
    throw ConfigError("keep fraction must lie in (0, 1], got " + std::to_string(keep_fraction));
  }
  if (keep_fraction == 1.0) return split;
  const std::size_t observed =
      split.train.count() + split.validation.count() + split.test.count();
  // The small offset keeps products such as 0.7 * 1000 from flooring to 699.
  const auto keep = static_cast<std::size_t>(
      std::floor(keep_fraction * static_cast<double>(observed) + 1e-9));

  std::vector<Cell> train_cells;
  for (std::size_t i = 0; i < split.train.user_count(); ++i) {
    for (std::size_t j = 0; j < split.train.type_count(); ++j) {
      if (split.train(i, j)) train_cells.push_back({i, j});
    }
  }
  if (keep > train_cells.size()) {
    throw ConfigError("keep fraction " + std::to_string(keep_fraction) + " asks for " +
                      std::to_string(keep) + " training cells but only " +
                      std::to_string(train_cells.size()) + " are available");
  }
  if (keep == train_cells.size()) return split;

  rng.shuffle(train_cells);
  LabelSplit out{LabelMask(split.train.user_count(), split.train.type_count()), split.validation,
                 split.test};
  for (std::size_t k = 0; k < keep; ++k) out.train.set(train_cells[k].user, train_cells[k].type, true);
  return out;
}

UserPartition partition_users_unchecked(const AttributedGraph& g, const LabelMask& train) {
  require_mask_shape(g, train);
  UserPartition p;
  for (std::size_t i = 0; i < g.user_count(); ++i) {
    bool complete = true;
    for (std::size_t j = 0; j < g.type_count() && complete; ++j) {
      complete = train(i, j) && g.label(i, j) != 0;
    }
    (complete ? p.labeled : p.unlabeled).push_back(i);
  }
  return p;
}

UserPartition partition_users(const AttributedGraph& g, const LabelMask& train) {
  UserPartition p = partition_users_unchecked(g, train);
  if (p.labeled.empty()) {
    throw ConfigError("no user has every attribute visible in the training view; "
                      "adversarial positives and the labeled-user MI term need at least one");
  }
  return p;
}

}  // namespace attrinfer
