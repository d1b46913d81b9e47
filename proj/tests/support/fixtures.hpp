#pragma once

#include <filesystem>
#include <string>

#include "netsync/edge_list.hpp"

#ifndef NETSYNC_FIXTURE_DIR
#error "NETSYNC_FIXTURE_DIR must point at tests/fixtures"
#endif

namespace netsync::testing {

inline std::filesystem::path fixture(const std::string& name) {
  return std::filesystem::path(NETSYNC_FIXTURE_DIR) / name;
}

inline WeightedDigraph load(const std::string& name) { return read_edge_list(fixture(name)); }

}  // namespace netsync::testing
