#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "otgk/graph.hpp"

namespace otgk {

// Reads the TU Dortmund benchmark layout from `directory`:
//   <name>_A.txt                 "i, j" per line, 1-based global node ids
//   <name>_graph_indicator.txt   graph id (1-based) of node i on line i
//   <name>_graph_labels.txt      class label of graph g on line g
//   <name>_node_labels.txt       optional, integer label of node i
// Edge and node attributes are ignored. Reversed duplicates (i,j)/(j,i) are
// merged silently; self-loops and repeated pairs are dropped with a warning
// appended to `warnings` (or printed to stderr when `warnings` is null).
GraphDataset parse_tu_dataset(const std::filesystem::path& directory,
                              const std::string& dataset_name,
                              std::vector<std::string>* warnings = nullptr);

// Writes `ds` in the same layout. Every edge is emitted in both directions,
// matching the published files.
void write_tu_dataset(const GraphDataset& ds,
                      const std::filesystem::path& directory);

}  // namespace otgk
