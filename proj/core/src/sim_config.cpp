#include "netsync/sim_config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "netsync/edge_list.hpp"
#include "netsync/error.hpp"

namespace netsync {
namespace {

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::kParseError, "config line " + std::to_string(line) + ": " + what);
}

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<double> numbers(const std::string& value, std::size_t line) {
  std::istringstream in(value);
  std::vector<double> out;
  for (std::string tok; in >> tok;) {
    double x = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) fail(line, "bad number '" + tok + "'");
    out.push_back(x);
  }
  return out;
}

double single(const std::string& value, std::size_t line) {
  auto v = numbers(value, line);
  if (v.size() != 1) fail(line, "expected one number, got '" + value + "'");
  return v[0];
}

bool integral(double x) { return x == static_cast<double>(static_cast<long long>(x)); }

void append(std::string& out, double x) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
  out.append(buf, ptr);
}

}  // namespace

SimSpec parse_sim_config(std::istream& in, const std::filesystem::path& base_dir) {
  SimSpec spec;
  struct PendingEvent {
    std::vector<double> fields;
    std::size_t line;
  };
  std::vector<PendingEvent> pending;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    SimConfig& c = spec.config;

    if (key == "graph") {
      if (value.empty()) fail(line_no, "empty graph path");
      spec.graph_path = std::filesystem::path(value).is_absolute() ? std::filesystem::path(value)
                                                                    : base_dir / value;
    } else if (key == "alpha") {
      c.alpha = single(value, line_no);
    } else if (key == "a") {
      c.local.a = single(value, line_no);
    } else if (key == "b") {
      c.local.b = single(value, line_no);
    } else if (key == "c") {
      c.local.c = single(value, line_no);
    } else if (key == "coupling") {
      auto v = numbers(value, line_no);
      if (v.size() != 9) fail(line_no, "coupling needs 9 numbers (row-major 3x3)");
      for (int i = 0; i < 9; ++i) c.coupling(i / 3, i % 3) = v[i];
    } else if (key == "dt") {
      c.dt = single(value, line_no);
    } else if (key == "t_start") {
      c.t_start = single(value, line_no);
    } else if (key == "t_end") {
      c.t_end = single(value, line_no);
    } else if (key == "seed") {
      const double s = single(value, line_no);
      if (s < 0 || !integral(s)) fail(line_no, "seed must be a nonnegative integer");
      c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "save_stride") {
      const double s = single(value, line_no);
      if (s < 1 || !integral(s)) fail(line_no, "save_stride must be a positive integer");
      c.save_stride = static_cast<int>(s);
    } else if (key == "jitter") {
      c.jitter = single(value, line_no);
    } else if (key == "event_jitter") {
      c.event_jitter = single(value, line_no);
    } else if (key == "event") {
      auto v = numbers(value, line_no);
      if (v.size() != 4) fail(line_no, "event needs 'time source destination weight'");
      if (!integral(v[1]) || !integral(v[2])) fail(line_no, "event node ids must be integers");
      pending.push_back({std::move(v), line_no});
    } else if (key == "initial") {
      auto v = numbers(value, line_no);
      if (v.size() != 3) fail(line_no, "initial needs 3 numbers");
      spec.initial = State3(v[0], v[1], v[2]);
    } else {
      fail(line_no, "unknown key '" + key + "'");
    }
  }
  if (spec.graph_path.empty()) throw Error(ErrorKind::kParseError, "config has no 'graph' entry");
  spec.config.graph = read_edge_list(spec.graph_path);
  for (const auto& p : pending) {
    if (p.fields[1] < 1 || p.fields[2] < 1 || p.fields[1] > spec.config.graph.size() ||
        p.fields[2] > spec.config.graph.size()) {
      throw Error(ErrorKind::kIndexOutOfRange,
                  "config line " + std::to_string(p.line) + ": event node outside the graph");
    }
    spec.config.events.push_back({p.fields[0], static_cast<NodeId>(p.fields[1]) - 1,
                                  static_cast<NodeId>(p.fields[2]) - 1, p.fields[3]});
  }
  validate(spec.config);
  return spec;
}

SimSpec read_sim_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open '" + path.string() + "'");
  return parse_sim_config(in, path.parent_path());
}

NodeStates initial_state(const SimSpec& spec) {
  const State3 base = spec.initial ? *spec.initial : attractor_point(spec.config.local);
  return jittered_state(base, spec.config.graph.size(), spec.config.jitter, spec.config.seed);
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const Eigen::Index n = traj.final_state.rows();
  std::string line = "t,sync_error";
  for (Eigen::Index i = 0; i < n; ++i)
    for (int d = 0; d < 3; ++d) line += ",x_" + std::to_string(i + 1) + "_" + std::to_string(d + 1);
  out << line << '\n';
  for (std::size_t s = 0; s < traj.times.size(); ++s) {
    line.clear();
    append(line, traj.times[s]);
    line += ',';
    append(line, traj.sync_error[s]);
    const NodeStates& x = traj.states[s];
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      line += ',';
      append(line, x.data()[i]);
    }
    out << line << '\n';
  }
}

}  // namespace netsync
