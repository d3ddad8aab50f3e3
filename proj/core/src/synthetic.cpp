#include "attrinfer/synthetic.hpp"

#include <cmath>
#include <string>

#include "attrinfer/error.hpp"
#include "attrinfer/graph_io.hpp"

namespace attrinfer {

SyntheticConfig benchmark_synthetic_config(std::size_t n_users) {
  const std::size_t counts[] = {3, 4, 5};
  SyntheticConfig cfg;
  cfg.n_users = n_users;
  cfg.schema = AttributeSchema::from_label_counts(counts);
  cfg.n_communities = 3;
  cfg.homophily = 0.8;
  cfg.missing_rate = 0.3;
  return cfg;
}

SyntheticGraph generate_synthetic(const SyntheticConfig& config, Rng& rng) {
  const std::size_t n = config.n_users;
  const AttributeSchema& schema = config.schema;
  const std::size_t n_types = schema.type_count();
  if (n < 2) throw ConfigError("synthetic graph needs at least 2 users");
  if (n_types == 0) throw ConfigError("synthetic graph needs a non-empty schema");
  if (config.n_communities == 0 || config.n_communities > n) {
    throw ConfigError("community count must lie in [1, users]");
  }
  if (config.n_communities > schema.min_label_count()) {
    throw ConfigError(std::to_string(config.n_communities) +
                      " communities exceed the smallest label count " +
                      std::to_string(schema.min_label_count()));
  }
  if (!(config.homophily >= 0.0 && config.homophily <= 1.0)) {
    throw ConfigError("homophily must lie in [0, 1]");
  }
  if (!(config.missing_rate >= 0.0 && config.missing_rate < 1.0)) {
    throw ConfigError("missing rate must lie in [0, 1)");
  }

  SyntheticGraph out;
  out.community.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.community[i] = i % config.n_communities;
  rng.shuffle(out.community);

  out.ground_truth.resize(n * n_types);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n_types; ++j) {
      const std::size_t k = schema.label_count(j);
      const std::size_t label =
          rng.bernoulli(config.homophily) ? out.community[i] : rng.uniform_index(k);
      out.ground_truth[i * n_types + j] = static_cast<int>(label + 1);
    }
  }

  std::vector<std::size_t> sizes(config.n_communities, 0);
  for (std::size_t c : out.community) ++sizes[c];
  double same_pairs = 0.0;
  for (std::size_t s : sizes) same_pairs += 0.5 * static_cast<double>(s) * static_cast<double>(s - 1);
  const double all_pairs = 0.5 * static_cast<double>(n) * static_cast<double>(n - 1);
  const double cross_pairs = all_pairs - same_pairs;
  const double weighted_pairs = same_pairs + cross_pairs * (1.0 - config.homophily);
  if (!(config.mean_degree >= 1.0) || weighted_pairs <= 0.0) {
    throw ConfigError("parameters imply an expected degree below 1");
  }
  const double p_in = config.mean_degree * static_cast<double>(n) / (2.0 * weighted_pairs);
  if (p_in > 1.0) {
    throw ConfigError("mean degree " + std::to_string(config.mean_degree) +
                      " is unreachable with this many users and this homophily");
  }
  const double p_out = p_in * (1.0 - config.homophily);

  std::vector<Edge> edges;
  for (std::size_t u = 0; u < n; ++u) {
    for (std::size_t v = u + 1; v < n; ++v) {
      const double p = out.community[u] == out.community[v] ? p_in : p_out;
      if (rng.bernoulli(p)) edges.push_back({u, v});
    }
  }

  std::vector<int> observed = out.ground_truth;
  std::vector<std::size_t> cells(n * n_types);
  for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = k;
  rng.shuffle(cells);
  const auto n_missing =
      static_cast<std::size_t>(std::llround(config.missing_rate * static_cast<double>(cells.size())));
  for (std::size_t k = 0; k < n_missing; ++k) observed[cells[k]] = 0;

  out.graph = AttributedGraph(n, std::move(edges), schema, std::move(observed));
  return out;
}

void write_synthetic(const SyntheticGraph& synthetic, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  const AttributedGraph& g = synthetic.graph;
  write_schema(g.schema(), dir / "schema.json");
  write_nodes(g, dir / "nodes.tsv");
  write_edges(g, dir / "edges.tsv");
  write_assignments(g.user_count(), g.type_count(), synthetic.ground_truth, dir / "ground_truth.tsv");
}

}  // namespace attrinfer
