#pragma once

#include <filesystem>
#include <iosfwd>
#include <string_view>

#include "netsync/graph.hpp"

namespace netsync {

// Edge-list text format, one arc per line:
//
//   # comment
//   nodes 5          (optional; otherwise n = largest id seen)
//   1 2 0.75         (source, destination, positive weight; ids are 1-based)
//
// Node ids are converted to 0-based on ingestion. Malformed lines raise
// Error{kParseError} with the line number; structural problems raise the
// matching graph error kind, also with the line number.
WeightedDigraph parse_edge_list(std::istream& in);
WeightedDigraph parse_edge_list(std::string_view text);
WeightedDigraph read_edge_list(const std::filesystem::path& path);

// Writes the "nodes N" header and every arc with round-trip exact weights.
void write_edge_list(std::ostream& out, const WeightedDigraph& g);

}  // namespace netsync
