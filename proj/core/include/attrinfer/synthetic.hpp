#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

#include "attrinfer/graph.hpp"
#include "attrinfer/rng.hpp"

namespace attrinfer {

// Planted-community graph with attributes that follow the communities.
//
// Users are spread evenly over the communities. For every attribute type a user
// takes the label aligned with its community (label c + 1) with probability
// `homophily`, otherwise a uniform label. Same-community pairs are linked with
// probability p_in and other pairs with p_out = p_in * (1 - homophily); p_in
// is chosen so the expected mean degree equals `mean_degree`. Finally
// round(missing_rate * N * L) cells are hidden.
struct SyntheticConfig {
  std::size_t n_users = 300;
  AttributeSchema schema;
  std::size_t n_communities = 3;
  double homophily = 0.8;
  double missing_rate = 0.3;
  double mean_degree = 10.0;
};

struct SyntheticGraph {
  AttributedGraph graph;              // with the missing cells zeroed
  std::vector<int> ground_truth;      // N×L, no missing cells
  std::vector<std::size_t> community; // per user
};

// Throws ConfigError for out-of-range parameters, more communities than the
// smallest label count, or an expected degree below 1 (or one that needs p_in > 1).
SyntheticGraph generate_synthetic(const SyntheticConfig& config, Rng& rng);

// The benchmark graph used by the experiment checks: 3 attribute types with
// 3/4/5 labels, 3 communities, homophily 0.8, 30% missing.
SyntheticConfig benchmark_synthetic_config(std::size_t n_users = 300);

// schema.json, nodes.tsv, edges.tsv and ground_truth.tsv under `dir`.
void write_synthetic(const SyntheticGraph& synthetic, const std::filesystem::path& dir);

}  // namespace attrinfer
