#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "netsync/dynamics.hpp"

namespace netsync {

// Flat key-value simulation config, one "key = value" per line, '#' comments:
//
//   graph = master_slave.edges     (relative to the config file)
//   alpha = 0.12
//   a = 0.2, b = 0.2, c = 7        (one key per line)
//   coupling = 1 0 0 0 1 0 0 0 1   (row-major 3x3, default identity)
//   dt = 0.01
//   t_end = 8000
//   seed = 7
//   save_stride = 100
//   jitter = 1e-3
//   event_jitter = 1e-8
//   event = 4000 4 2 2             (time, source, destination, weight; 1-based ids)
//   initial = 1 1 1                (synchronous base point; default: on the attractor)
struct SimSpec {
  SimConfig config;
  std::filesystem::path graph_path;
  std::optional<State3> initial;
};

// Throws Error{kParseError} with the line number.
SimSpec parse_sim_config(std::istream& in, const std::filesystem::path& base_dir);
SimSpec read_sim_config(const std::filesystem::path& path);

// Synchronous base point plus the configured jitter.
NodeStates initial_state(const SimSpec& spec);

// Header "t,sync_error,x_1_1,x_1_2,..." with 1-based node and component ids.
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace netsync
