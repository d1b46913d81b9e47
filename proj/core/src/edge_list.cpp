#include "netsync/edge_list.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "netsync/error.hpp"

namespace netsync {
namespace {

[[noreturn]] void fail(ErrorKind kind, std::size_t line, const std::string& what) {
  throw Error(kind, "line " + std::to_string(line) + ": " + what);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

template <typename T>
std::optional<T> parse_number(std::string_view token) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) return std::nullopt;
  return value;
}

}  // namespace

WeightedDigraph parse_edge_list(std::istream& in) {
  std::vector<Edge> edges;
  std::map<std::pair<NodeId, NodeId>, std::size_t> seen;
  std::optional<long long> declared_n;
  long long max_id = 0;
  std::string raw;
  std::size_t line_no = 0;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;

    std::istringstream tokens{std::string(line)};
    std::vector<std::string> parts;
    for (std::string t; tokens >> t;) parts.push_back(t);

    if (parts[0] == "nodes") {
      if (parts.size() != 2) fail(ErrorKind::kParseError, line_no, "expected 'nodes N'");
      if (declared_n) fail(ErrorKind::kParseError, line_no, "duplicate 'nodes' header");
      auto n = parse_number<long long>(parts[1]);
      if (!n || *n < 1) fail(ErrorKind::kParseError, line_no, "bad node count '" + parts[1] + "'");
      declared_n = *n;
      continue;
    }
    if (parts.size() != 3) {
      fail(ErrorKind::kParseError, line_no, "expected 'u v w', got '" + std::string(line) + "'");
    }
    auto u = parse_number<long long>(parts[0]);
    auto v = parse_number<long long>(parts[1]);
    auto w = parse_number<double>(parts[2]);
    if (!u || !v || !w) {
      fail(ErrorKind::kParseError, line_no, "malformed arc '" + std::string(line) + "'");
    }
    if (*u < 1 || *v < 1) fail(ErrorKind::kIndexOutOfRange, line_no, "node ids are 1-based");
    if (*u == *v) fail(ErrorKind::kSelfLoop, line_no, "self-loop on node " + parts[0]);
    if (!(*w > 0.0)) fail(ErrorKind::kNonPositiveWeight, line_no, "weight " + parts[2]);

    Edge e{static_cast<NodeId>(*u - 1), static_cast<NodeId>(*v - 1), *w};
    auto [it, inserted] = seen.emplace(std::pair(e.src, e.dst), line_no);
    if (!inserted) {
      fail(ErrorKind::kDuplicateEdge, line_no,
           "arc " + parts[0] + " -> " + parts[1] + " already given on line " +
               std::to_string(it->second));
    }
    max_id = std::max({max_id, *u, *v});
    edges.push_back(e);
  }

  if (declared_n && max_id > *declared_n) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "node id " + std::to_string(max_id) + " exceeds declared 'nodes " +
                    std::to_string(*declared_n) + "'");
  }
  const long long n = declared_n.value_or(max_id);
  if (n < 1) throw Error(ErrorKind::kParseError, "edge list declares no nodes");
  return build_graph(static_cast<NodeId>(n), std::move(edges));
}

WeightedDigraph parse_edge_list(std::string_view text) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in);
}

WeightedDigraph read_edge_list(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kParseError, "cannot open '" + path.string() + "'");
  return parse_edge_list(in);
}

void write_edge_list(std::ostream& out, const WeightedDigraph& g) {
  out << "nodes " << g.size() << '\n';
  char buf[64];
  for (const Edge& e : g.edges()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.weight);
    out << e.src + 1 << ' ' << e.dst + 1 << ' ' << std::string_view(buf, ptr - buf) << '\n';
  }
}

}  // namespace netsync
