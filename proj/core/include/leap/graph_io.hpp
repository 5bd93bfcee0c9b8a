#pragma once

#include <string>
#include <vector>

#include "leap/graph.hpp"

namespace leap {

// Text format:
//   line 1: "N D" (optionally followed by "label <int>")
//   lines 2..N+1: D feature values per row, space separated
//   optional line: "labels <int> x N" (per-node labels)
//   remaining lines: one edge "i j" per line, 0-based
// Floats are written with 17 significant digits so parsing is exact.
std::string serialize_graph(const Graph& g);
Graph parse_graph(const std::string& content);

Graph load_graph(const std::string& path);
void save_graph(const Graph& g, const std::string& path);

// Dataset manifest: header line "leap-dataset 1 <count>", then one line per
// graph: "<file> <label> <split>" where split is train/val/test/none.
struct ManifestEntry {
  std::string file;
  int label = -1;
  std::string split;  // "train", "val", "test" or "none"
};

std::string serialize_manifest(const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> parse_manifest(const std::string& content);

}  // namespace leap
