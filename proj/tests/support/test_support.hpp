#pragma once

// Fixtures and independent reference implementations shared by the test
// binaries. The oracles here deliberately use the most literal formulation
// (triple loops, direct exponentials) rather than the library kernels.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <string>
#include <vector>

#include "attrinfer/dense_matrix.hpp"
#include "attrinfer/graph.hpp"
#include "attrinfer/rng.hpp"
#include "attrinfer/sparse_matrix.hpp"
#include "attrinfer/training.hpp"

namespace attrinfer::testing {

inline DenseMatrix random_matrix(std::size_t rows, std::size_t cols, Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
  DenseMatrix m(rows, cols);
  for (double& v : m.values()) v = rng.uniform(lo, hi);
  return m;
}

inline DenseMatrix naive_matmul(const DenseMatrix& a, const DenseMatrix& b) {
  DenseMatrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

inline DenseMatrix naive_transpose(const DenseMatrix& a) {
  DenseMatrix t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  }
  return t;
}

inline double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  double worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    worst = std::max(worst, std::abs(a.values()[k] - b.values()[k]));
  }
  return worst;
}

// Dense D^{-1/2}(A+I)D^{-1/2} from an edge list.
inline DenseMatrix dense_normalized_adjacency(std::size_t n, const std::vector<Edge>& edges) {
  DenseMatrix a = DenseMatrix::identity(n);
  for (const auto& e : edges) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  std::vector<double> deg(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) deg[i] += a(i, j);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) a(i, j) /= std::sqrt(deg[i] * deg[j]);
  }
  return a;
}

// Random 2m-regular graph: a circulant over m distinct offsets in [1, n/2),
// relabeled by a random permutation.
inline std::vector<Edge> random_regular_edges(std::size_t n, std::size_t m, Rng& rng) {
  std::vector<std::size_t> offsets;
  for (std::size_t d = 1; 2 * d < n; ++d) offsets.push_back(d);
  rng.shuffle(offsets);
  offsets.resize(m);
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d : offsets) edges.push_back({perm[i], perm[(i + d) % n]});
  }
  return edges;
}

// 12 users, 2 attribute types with 3 and 2 labels, 16 edges; two users have a
// missing cell so both sides of the labeled/unlabeled partition are populated.
inline AttributedGraph toy_graph() {
  const std::size_t counts[] = {3, 2};
  AttributeSchema schema = AttributeSchema::from_label_counts(counts);
  std::vector<Edge> edges = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5},  {5, 6},
                             {6, 7}, {7, 8}, {8, 9}, {9, 10}, {10, 11}, {0, 11},
                             {0, 6}, {2, 8}, {3, 9}, {5, 11}};
  std::vector<int> labels = {1, 1, 1, 2, 2, 1, 2, 2, 3, 1, 3, 0, 1, 2, 2, 1,
                             0, 2, 3, 2, 1, 1, 2, 2};
  return AttributedGraph(12, std::move(edges), std::move(schema), std::move(labels));
}

// Training view of the toy graph: every observed cell is visible for training
// except cells (4, 1), (9, 0) and (10, 1), which serve as validation/test.
inline LabelSplit toy_split(const AttributedGraph& g) {
  LabelSplit s{LabelMask(g.user_count(), g.type_count()), LabelMask(g.user_count(), g.type_count()),
               LabelMask(g.user_count(), g.type_count())};
  for (std::size_t i = 0; i < g.user_count(); ++i) {
    for (std::size_t j = 0; j < g.type_count(); ++j) {
      if (g.label(i, j) != 0) s.train.set(i, j, true);
    }
  }
  s.train.set(4, 1, false);
  s.validation.set(4, 1, true);
  s.train.set(9, 0, false);
  s.test.set(9, 0, true);
  s.train.set(10, 1, false);
  s.test.set(10, 1, true);
  return s;
}

inline TrainingData toy_data() {
  const AttributedGraph g = toy_graph();
  return prepare_training_data(g, toy_split(g));
}

inline ModelDims toy_dims(std::size_t features, EncoderKind kind = EncoderKind::graph) {
  ModelDims d;
  d.features = features;
  d.mlp_hidden = 5;
  d.latent = 4;
  d.gcn_hidden = 5;
  d.decoder_hidden = 6;
  d.disc_hidden1 = 16;
  d.disc_hidden2 = 4;
  d.encoder = kind;
  return d;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("attrinfer_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace attrinfer::testing
