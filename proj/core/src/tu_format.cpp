#include "otgk/tu_format.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <iostream>
#include <set>

#include "otgk/error.hpp"

namespace otgk {
namespace {

namespace fs = std::filesystem;

struct Line {
  long number;
  std::vector<long> values;
};

bool is_separator(char c) {
  return c == ',' || c == ' ' || c == '\t' || c == '\r';
}

// Integer tokens of every non-blank line. Float tokens such as "1.0" are
// rejected: the TU index and label files are integral.
std::vector<Line> read_integer_lines(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError(path.string(), 0, "cannot open file");
  }
  std::vector<Line> lines;
  std::string text;
  long number = 0;
  while (std::getline(in, text)) {
    ++number;
    Line line{number, {}};
    std::size_t pos = 0;
    while (pos < text.size()) {
      while (pos < text.size() && is_separator(text[pos])) ++pos;
      if (pos >= text.size()) break;
      std::size_t end = pos;
      while (end < text.size() && !is_separator(text[end])) ++end;
      long value = 0;
      const char* first = text.data() + pos;
      const char* last = text.data() + end;
      if (*first == '+') ++first;
      auto [ptr, ec] = std::from_chars(first, last, value);
      if (ec != std::errc() || ptr != last) {
        throw ParseError(path.string(), number,
                         "non-integer token '" + text.substr(pos, end - pos) +
                             "'");
      }
      line.values.push_back(value);
      pos = end;
    }
    if (!line.values.empty()) lines.push_back(std::move(line));
  }
  return lines;
}

fs::path member(const fs::path& dir, const std::string& name,
                const std::string& suffix) {
  return dir / (name + "_" + suffix + ".txt");
}

void require_file(const fs::path& path) {
  if (!fs::exists(path)) throw ParseError(path.string(), 0, "missing file");
}

void warn(std::vector<std::string>* sink, const std::string& message) {
  if (sink) {
    sink->push_back(message);
  } else {
    std::cerr << "warning: " << message << '\n';
  }
}

}  // namespace

GraphDataset parse_tu_dataset(const fs::path& directory,
                              const std::string& dataset_name,
                              std::vector<std::string>* warnings) {
  if (!fs::is_directory(directory)) {
    throw ParseError(directory.string(), 0, "not a directory");
  }
  const fs::path edge_path = member(directory, dataset_name, "A");
  const fs::path indicator_path =
      member(directory, dataset_name, "graph_indicator");
  const fs::path label_path = member(directory, dataset_name, "graph_labels");
  const fs::path node_label_path =
      member(directory, dataset_name, "node_labels");
  require_file(edge_path);
  require_file(indicator_path);
  require_file(label_path);

  // Node -> (graph, local index).
  const auto indicator_lines = read_integer_lines(indicator_path);
  std::vector<int> graph_of;
  std::vector<int> local_index;
  std::vector<int> graph_sizes;
  graph_of.reserve(indicator_lines.size());
  for (const auto& line : indicator_lines) {
    if (line.values.size() != 1) {
      throw ParseError(indicator_path.string(), line.number,
                       "expected one graph id per line");
    }
    const long id = line.values[0];
    if (id < 1 || id > 100'000'000) {
      throw ParseError(indicator_path.string(), line.number,
                       "graph id out of range: " + std::to_string(id));
    }
    const int graph = static_cast<int>(id - 1);
    if (graph >= static_cast<int>(graph_sizes.size())) {
      graph_sizes.resize(graph + 1, 0);
    }
    graph_of.push_back(graph);
    local_index.push_back(graph_sizes[graph]++);
  }
  const long num_nodes = static_cast<long>(graph_of.size());

  const auto label_lines = read_integer_lines(label_path);
  if (label_lines.size() != graph_sizes.size()) {
    throw ParseError(label_path.string(), 0,
                     std::to_string(label_lines.size()) +
                         " graph labels but indicator file declares " +
                         std::to_string(graph_sizes.size()) + " graphs");
  }
  for (std::size_t g = 0; g < graph_sizes.size(); ++g) {
    if (graph_sizes[g] == 0) {
      throw ParseError(indicator_path.string(), 0,
                       "graph id " + std::to_string(g + 1) + " has no nodes");
    }
  }

  std::optional<std::vector<long>> node_labels;
  if (fs::exists(node_label_path)) {
    node_labels.emplace();
    for (const auto& line : read_integer_lines(node_label_path)) {
      if (line.values.empty()) continue;
      node_labels->push_back(line.values[0]);
    }
    if (static_cast<long>(node_labels->size()) != num_nodes) {
      throw ParseError(node_label_path.string(), 0,
                       std::to_string(node_labels->size()) +
                           " node labels but indicator file declares " +
                           std::to_string(num_nodes) + " nodes");
    }
  }

  std::vector<std::set<Edge>> edges(graph_sizes.size());
  std::size_t self_loops = 0;
  std::size_t repeats = 0;
  std::set<std::pair<long, long>> seen_directed;
  for (const auto& line : read_integer_lines(edge_path)) {
    if (line.values.size() != 2) {
      throw ParseError(edge_path.string(), line.number,
                       "expected two node ids per line");
    }
    const long a = line.values[0];
    const long b = line.values[1];
    for (long node : {a, b}) {
      if (node < 1 || node > num_nodes) {
        throw ParseError(edge_path.string(), line.number,
                         "node id " + std::to_string(node) +
                             " out of range [1, " + std::to_string(num_nodes) +
                             "]");
      }
    }
    const int ga = graph_of[a - 1];
    const int gb = graph_of[b - 1];
    if (ga != gb) {
      throw ParseError(edge_path.string(), line.number,
                       "edge joins nodes of different graphs");
    }
    if (a == b) {
      ++self_loops;
      continue;
    }
    if (!seen_directed.insert({a, b}).second) {
      ++repeats;
      continue;
    }
    int u = local_index[a - 1];
    int v = local_index[b - 1];
    if (u > v) std::swap(u, v);
    edges[ga].insert({u, v});
  }
  if (self_loops > 0) {
    warn(warnings, dataset_name + ": dropped " + std::to_string(self_loops) +
                       " self-loop(s)");
  }
  if (repeats > 0) {
    warn(warnings, dataset_name + ": dropped " + std::to_string(repeats) +
                       " duplicate edge line(s)");
  }

  GraphDataset ds;
  ds.name = dataset_name;
  ds.graphs.reserve(graph_sizes.size());
  std::vector<std::vector<int>> labels_per_graph(graph_sizes.size());
  if (node_labels) {
    for (long node = 0; node < num_nodes; ++node) {
      labels_per_graph[graph_of[node]].push_back(
          static_cast<int>((*node_labels)[node]));
    }
  }
  for (std::size_t g = 0; g < graph_sizes.size(); ++g) {
    std::optional<std::vector<int>> labels;
    if (node_labels) labels = std::move(labels_per_graph[g]);
    ds.graphs.emplace_back(graph_sizes[g],
                           std::vector<Edge>(edges[g].begin(), edges[g].end()),
                           std::move(labels));
  }
  for (const auto& line : label_lines) {
    if (line.values.size() != 1) {
      throw ParseError(label_path.string(), line.number,
                       "expected one label per line");
    }
    ds.class_labels.push_back(static_cast<int>(line.values[0]));
  }
  ds.validate();
  return ds;
}

void write_tu_dataset(const GraphDataset& ds, const fs::path& directory) {
  ds.validate();
  fs::create_directories(directory);
  auto open = [&](const std::string& suffix) {
    std::ofstream out(member(directory, ds.name, suffix));
    if (!out) {
      throw Error("cannot write " + member(directory, ds.name, suffix).string());
    }
    return out;
  };
  auto edges_out = open("A");
  auto indicator_out = open("graph_indicator");
  auto labels_out = open("graph_labels");
  const bool with_node_labels =
      !ds.graphs.empty() &&
      std::all_of(ds.graphs.begin(), ds.graphs.end(),
                  [](const Graph& g) { return g.node_labels().has_value(); });
  std::ofstream node_labels_out;
  if (with_node_labels) node_labels_out = open("node_labels");

  long offset = 0;
  for (std::size_t g = 0; g < ds.graphs.size(); ++g) {
    const Graph& graph = ds.graphs[g];
    for (int v = 0; v < graph.num_nodes(); ++v) {
      indicator_out << (g + 1) << '\n';
      if (with_node_labels) node_labels_out << (*graph.node_labels())[v] << '\n';
    }
    for (const auto& [u, v] : graph.edges()) {
      edges_out << (offset + u + 1) << ", " << (offset + v + 1) << '\n';
      edges_out << (offset + v + 1) << ", " << (offset + u + 1) << '\n';
    }
    offset += graph.num_nodes();
    labels_out << ds.class_labels[g] << '\n';
  }
}

}  // namespace otgk
