#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace netsync::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitPrecondition = 2;
inline constexpr int kExitNumerical = 3;

struct Options {
  std::optional<std::uint64_t> seed;
  unsigned threads = 1;
  std::optional<double> tol;
  std::string output;  // empty: stdout
  std::string format = "json";
};

struct OracleArgs {
  std::vector<long long> arc;  // 1-based "u v", empty for a sweep over all arcs
  double weight = 1.0;
  bool undirected = false;
  double eps = 1e-6;
};

int cmd_analyze(const std::string& graph_path, const Options& opts, std::ostream& out);
int cmd_classify(const std::string& graph_path, bool with_fd, const Options& opts, std::ostream& out);
int cmd_simulate(const std::string& config_path, const Options& opts, std::ostream& out);
int cmd_oracle(const std::string& graph_path, const OracleArgs& args, const Options& opts,
               std::ostream& out);

// Parses argv and dispatches. Library errors become a one-line diagnostic on
// err and exit code 2 (structure, input) or 3 (numerical failure).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace netsync::cli
