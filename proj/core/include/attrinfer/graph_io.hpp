#pragma once

#include <filesystem>
#include <span>

#include "attrinfer/graph.hpp"

namespace attrinfer {

// File formats:
//   schema.json  {"attributes": [{"name": str, "labels": [str, ...]}, ...]}
//   nodes.tsv    user_id<TAB>a_1<TAB>...<TAB>a_L   (ids dense 0..N-1, 0 = missing)
//   edges.tsv    u<TAB>v                           (undirected)
// Blank lines are ignored. Parse problems raise ParseError with the line
// number; labels outside a type's range raise SchemaError.

AttributeSchema load_schema(const std::filesystem::path& path);
AttributedGraph load_graph(const std::filesystem::path& schema_path,
                           const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path);

void write_schema(const AttributeSchema& schema, const std::filesystem::path& path);
void write_nodes(const AttributedGraph& g, const std::filesystem::path& path);
void write_edges(const AttributedGraph& g, const std::filesystem::path& path);
// Full N×L assignment table in the nodes.tsv layout.
void write_assignments(std::size_t n_users, std::size_t n_types, std::span<const int> assignments,
                       const std::filesystem::path& path);

}  // namespace attrinfer
