#include "attrinfer/graph_io.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "attrinfer/error.hpp"
#include "json.hpp"

namespace attrinfer {
namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (start <= line.size()) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) tab = line.size();
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  return fields;
}

long long parse_integer(std::string_view field, const std::filesystem::path& path,
                        std::size_t line_no) {
  long long value = 0;
  const auto* first = field.data();
  const auto* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (field.empty() || ec != std::errc() || ptr != last) {
    throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected an integer, got '" +
                     std::string(field) + "'");
  }
  return value;
}

void strip_carriage_return(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

}  // namespace

AttributeSchema load_schema(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  if (!doc.is_object() || !doc.contains("attributes") || !doc["attributes"].is_array()) {
    throw ParseError(path.string() + ": expected an object with an \"attributes\" array");
  }
  std::vector<AttributeType> types;
  for (const auto& entry : doc["attributes"]) {
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string() ||
        !entry.contains("labels") || !entry["labels"].is_array()) {
      throw ParseError(path.string() + ": attribute " + std::to_string(types.size()) +
                       " needs a string \"name\" and a \"labels\" array");
    }
    AttributeType t{entry["name"].get<std::string>(), {}};
    for (const auto& label : entry["labels"]) {
      if (!label.is_string()) {
        throw ParseError(path.string() + ": labels of '" + t.name + "' must be strings");
      }
      t.labels.push_back(label.get<std::string>());
    }
    types.push_back(std::move(t));
  }
  return AttributeSchema(std::move(types));
}

AttributedGraph load_graph(const std::filesystem::path& schema_path,
                           const std::filesystem::path& nodes_path,
                           const std::filesystem::path& edges_path) {
  AttributeSchema schema = load_schema(schema_path);
  const std::size_t n_types = schema.type_count();

  // user id -> (line number, labels)
  std::vector<std::vector<int>> rows;
  std::vector<std::size_t> seen_on_line;
  {
    std::ifstream in = open_input(nodes_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      strip_carriage_return(line);
      if (line.empty()) continue;
      const auto fields = split_fields(line);
      if (fields.size() != n_types + 1) {
        throw ParseError(nodes_path.string() + ":" + std::to_string(line_no) + ": expected " +
                         std::to_string(n_types + 1) + " tab-separated fields, got " +
                         std::to_string(fields.size()));
      }
      const long long id = parse_integer(fields[0], nodes_path, line_no);
      if (id < 0) {
        throw ParseError(nodes_path.string() + ":" + std::to_string(line_no) +
                         ": negative user id " + std::to_string(id));
      }
      const auto user = static_cast<std::size_t>(id);
      if (user >= rows.size()) {
        rows.resize(user + 1);
        seen_on_line.resize(user + 1, 0);
      }
      if (seen_on_line[user] != 0) {
        throw ParseError(nodes_path.string() + ":" + std::to_string(line_no) + ": duplicate user id " +
                         std::to_string(user) + " (first seen on line " +
                         std::to_string(seen_on_line[user]) + ")");
      }
      seen_on_line[user] = line_no;
      std::vector<int> labels(n_types);
      for (std::size_t j = 0; j < n_types; ++j) {
        const long long a = parse_integer(fields[j + 1], nodes_path, line_no);
        if (a < 0 || static_cast<std::size_t>(a) > schema.label_count(j)) {
          throw SchemaError("user " + std::to_string(user) + " has label " + std::to_string(a) +
                            " for attribute '" + schema.type(j).name + "' which has " +
                            std::to_string(schema.label_count(j)) + " labels");
        }
        labels[j] = static_cast<int>(a);
      }
      rows[user] = std::move(labels);
    }
  }
  for (std::size_t user = 0; user < rows.size(); ++user) {
    if (seen_on_line[user] == 0) {
      throw ParseError(nodes_path.string() + ": user ids must be dense 0..N-1; id " +
                       std::to_string(user) + " is missing");
    }
  }
  const std::size_t n_users = rows.size();
  std::vector<int> assignments;
  assignments.reserve(n_users * n_types);
  for (const auto& r : rows) assignments.insert(assignments.end(), r.begin(), r.end());

  std::vector<Edge> edges;
  {
    std::ifstream in = open_input(edges_path);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      strip_carriage_return(line);
      if (line.empty()) continue;
      const auto fields = split_fields(line);
      if (fields.size() != 2) {
        throw ParseError(edges_path.string() + ":" + std::to_string(line_no) +
                         ": expected 2 tab-separated fields, got " + std::to_string(fields.size()));
      }
      const long long u = parse_integer(fields[0], edges_path, line_no);
      const long long v = parse_integer(fields[1], edges_path, line_no);
      if (u < 0 || v < 0 || static_cast<std::size_t>(u) >= n_users ||
          static_cast<std::size_t>(v) >= n_users) {
        throw ParseError(edges_path.string() + ":" + std::to_string(line_no) + ": endpoint outside [0, " +
                         std::to_string(n_users) + ")");
      }
      if (u == v) {
        throw ParseError(edges_path.string() + ":" + std::to_string(line_no) + ": self-loop on user " +
                         std::to_string(u));
      }
      edges.push_back({static_cast<std::size_t>(u), static_cast<std::size_t>(v)});
    }
  }
  return AttributedGraph(n_users, std::move(edges), std::move(schema), std::move(assignments));
}

void write_schema(const AttributeSchema& schema, const std::filesystem::path& path) {
  json attrs = json::array();
  for (const auto& t : schema.types()) attrs.push_back({{"name", t.name}, {"labels", t.labels}});
  std::ofstream out = open_output(path);
  out << json{{"attributes", attrs}}.dump(2) << "\n";
  if (!out) throw IoError("failed writing " + path.string());
}

void write_assignments(std::size_t n_users, std::size_t n_types, std::span<const int> assignments,
                       const std::filesystem::path& path) {
  if (assignments.size() != n_users * n_types) {
    throw DimensionError("assignment table has " + std::to_string(assignments.size()) +
                         " cells, expected " + std::to_string(n_users * n_types));
  }
  std::ofstream out = open_output(path);
  for (std::size_t i = 0; i < n_users; ++i) {
    out << i;
    for (std::size_t j = 0; j < n_types; ++j) out << '\t' << assignments[i * n_types + j];
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void write_nodes(const AttributedGraph& g, const std::filesystem::path& path) {
  write_assignments(g.user_count(), g.type_count(), g.assignments(), path);
}

void write_edges(const AttributedGraph& g, const std::filesystem::path& path) {
  std::ofstream out = open_output(path);
  for (const auto& e : g.edges()) out << e.u << '\t' << e.v << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace attrinfer
