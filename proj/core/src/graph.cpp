#include "netsync/graph.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>
#include <string>

#include "netsync/error.hpp"

namespace netsync {
namespace {

std::string describe(const Edge& e) {
  std::ostringstream os;
  os << "edge (" << e.src << " -> " << e.dst << ", w=" << e.weight << ")";
  return os.str();
}

bool compute_directed(std::span<const Edge> sorted_edges) {
  for (const Edge& e : sorted_edges) {
    auto it = std::lower_bound(
        sorted_edges.begin(), sorted_edges.end(), Edge{e.dst, e.src, 0.0},
        [](const Edge& a, const Edge& b) {
          return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
        });
    if (it == sorted_edges.end() || it->src != e.dst || it->dst != e.src ||
        it->weight != e.weight) {
      return true;
    }
  }
  return false;
}

// Iterative Tarjan. Emits components in reverse topological order.
std::vector<std::vector<NodeId>> tarjan(NodeId n,
                                        const std::vector<std::vector<NodeId>>& succ) {
  constexpr std::size_t kUnvisited = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> index(n, kUnvisited), low(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<NodeId> stack;
  std::vector<std::vector<NodeId>> out;
  std::size_t counter = 0;

  struct Frame {
    NodeId node;
    std::size_t next_child;
  };
  std::vector<Frame> call;

  for (NodeId root = 0; root < n; ++root) {
    if (index[root] != kUnvisited) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      const auto& children = succ[f.node];
      if (f.next_child < children.size()) {
        NodeId child = children[f.next_child++];
        if (index[child] == kUnvisited) {
          index[child] = low[child] = counter++;
          stack.push_back(child);
          on_stack[child] = true;
          call.push_back({child, 0});
        } else if (on_stack[child]) {
          low[f.node] = std::min(low[f.node], index[child]);
        }
        continue;
      }
      NodeId v = f.node;
      call.pop_back();
      if (!call.empty()) {
        low[call.back().node] = std::min(low[call.back().node], low[v]);
      }
      if (low[v] == index[v]) {
        std::vector<NodeId> comp;
        NodeId w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          comp.push_back(w);
        } while (w != v);
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
      }
    }
  }
  return out;
}

}  // namespace

double WeightedDigraph::weight(NodeId src, NodeId dst) const {
  auto it = std::lower_bound(edges_.begin(), edges_.end(), Edge{src, dst, 0.0},
                             [](const Edge& a, const Edge& b) {
                               return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
                             });
  if (it != edges_.end() && it->src == src && it->dst == dst) return it->weight;
  return 0.0;
}

bool WeightedDigraph::has_edge(NodeId src, NodeId dst) const {
  return weight(src, dst) > 0.0;
}

Eigen::MatrixXd WeightedDigraph::adjacency() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) w(e.dst, e.src) = e.weight;
  return w;
}

WeightedDigraph WeightedDigraph::with_added_weight(NodeId src, NodeId dst,
                                                   double weight) const {
  std::vector<Edge> edges = edges_;
  bool found = false;
  for (Edge& e : edges) {
    if (e.src == src && e.dst == dst) {
      e.weight += weight;
      found = true;
    }
  }
  if (!found) edges.push_back({src, dst, weight});
  return build_graph(n_, std::move(edges));
}

std::vector<std::vector<NodeId>> WeightedDigraph::out_neighbors() const {
  std::vector<std::vector<NodeId>> succ(n_);
  for (const Edge& e : edges_) succ[e.src].push_back(e.dst);
  return succ;
}

WeightedDigraph build_graph(NodeId n, std::vector<Edge> edges) {
  if (n < 1) {
    throw Error(ErrorKind::kInvalidArgument, "graph needs at least one node");
  }
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n) {
      throw Error(ErrorKind::kIndexOutOfRange, describe(e) + " with n=" + std::to_string(n));
    }
    if (e.src == e.dst) throw Error(ErrorKind::kSelfLoop, describe(e));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorKind::kNonPositiveWeight, describe(e));
    }
  }
  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i].src == edges[i - 1].src && edges[i].dst == edges[i - 1].dst) {
      throw Error(ErrorKind::kDuplicateEdge, describe(edges[i]));
    }
  }
  bool directed = compute_directed(edges);
  return WeightedDigraph(n, std::move(edges), directed);
}

LaplacianMatrix::LaplacianMatrix(Eigen::MatrixXd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "Laplacian must be square and nonempty");
  }
  const double scale = std::max(1.0, entries_.diagonal().cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < entries_.rows(); ++i) {
    if (std::abs(entries_.row(i).sum()) > 1e-12 * scale) {
      throw Error(ErrorKind::kInvalidArgument,
                  "Laplacian row " + std::to_string(i) + " does not sum to zero");
    }
    if (entries_(i, i) < 0.0) {
      throw Error(ErrorKind::kInvalidArgument, "negative Laplacian diagonal");
    }
    for (Eigen::Index j = 0; j < entries_.cols(); ++j) {
      if (i != j && entries_(i, j) > 0.0) {
        throw Error(ErrorKind::kInvalidArgument, "positive off-diagonal Laplacian entry");
      }
    }
  }
}

bool LaplacianMatrix::is_symmetric() const {
  return entries_ == entries_.transpose();
}

Eigen::MatrixXd laplacian_from_adjacency(const Eigen::MatrixXd& w) {
  Eigen::MatrixXd l = -w;
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    double degree = 0.0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      if (j != i) degree += w(i, j);
    }
    l(i, i) = degree;
  }
  return l;
}

LaplacianMatrix laplacian(const WeightedDigraph& g) {
  return LaplacianMatrix(laplacian_from_adjacency(g.adjacency()));
}

CondensationReport condensation(const WeightedDigraph& g) {
  CondensationReport report;
  auto comps = tarjan(g.size(), g.out_neighbors());
  std::reverse(comps.begin(), comps.end());
  report.component_of.assign(g.size(), 0);
  for (std::size_t c = 0; c < comps.size(); ++c) {
    for (NodeId v : comps[c]) report.component_of[v] = c;
  }
  std::set<std::pair<std::size_t, std::size_t>> dag;
  for (const Edge& e : g.edges()) {
    std::size_t a = report.component_of[e.src];
    std::size_t b = report.component_of[e.dst];
    if (a != b) dag.insert({a, b});
  }
  report.dag_edges.assign(dag.begin(), dag.end());
  std::vector<bool> has_incoming(comps.size(), false);
  for (const auto& [from, to] : report.dag_edges) has_incoming[to] = true;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (!has_incoming[c]) report.root_components.push_back(c);
  }
  report.components = std::move(comps);
  report.has_spanning_tree = report.root_components.size() == 1;
  return report;
}

Eigen::MatrixXd CutsetBlocks::slave_operator() const {
  Eigen::MatrixXd m = l2;
  m.diagonal() += d_c;
  return m;
}

Eigen::MatrixXd CutsetBlocks::assemble() const {
  const NodeId n1 = master_size(), n2 = slave_size();
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  l.topLeftCorner(n1, n1) = l1;
  l.bottomLeftCorner(n2, n1) = -c;
  l.bottomRightCorner(n2, n2) = slave_operator();
  return l;
}

NodeId CutsetBlocks::original_node(NodeId p) const {
  const NodeId n1 = master_size();
  return p < n1 ? master_nodes[p] : slave_nodes[p - n1];
}

Eigen::MatrixXd CutsetBlocks::to_original(const Eigen::MatrixXd& m) const {
  const NodeId n = master_size() + slave_size();
  Eigen::MatrixXd out(n, n);
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = 0; j < n; ++j) out(original_node(i), original_node(j)) = m(i, j);
  }
  return out;
}

CutsetBlocks cutset_blocks(const WeightedDigraph& g) {
  CondensationReport cond = condensation(g);
  if (cond.components.size() != 2) {
    throw Error(ErrorKind::kNotTwoComponents,
                "graph has " + std::to_string(cond.components.size()) +
                    " strong components; cutset analysis needs exactly two "
                    "(links inside a single strong component are not classified)");
  }
  if (!cond.has_spanning_tree) {
    throw Error(ErrorKind::kNoSpanningTree,
                "the two strong components are not joined by a cutset");
  }
  CutsetBlocks b;
  // Topological order puts the root (master) component first.
  b.master_nodes = cond.components[0];
  b.slave_nodes = cond.components[1];
  const NodeId n1 = static_cast<NodeId>(b.master_nodes.size());
  const NodeId n2 = static_cast<NodeId>(b.slave_nodes.size());

  std::vector<NodeId> local(g.size());
  for (NodeId i = 0; i < n1; ++i) local[b.master_nodes[i]] = i;
  for (NodeId i = 0; i < n2; ++i) local[b.slave_nodes[i]] = i;

  Eigen::MatrixXd w1 = Eigen::MatrixXd::Zero(n1, n1);
  Eigen::MatrixXd w2 = Eigen::MatrixXd::Zero(n2, n2);
  b.c = Eigen::MatrixXd::Zero(n2, n1);
  for (const Edge& e : g.edges()) {
    const bool src_master = cond.component_of[e.src] == 0;
    const bool dst_master = cond.component_of[e.dst] == 0;
    if (src_master && dst_master) {
      w1(local[e.dst], local[e.src]) = e.weight;
    } else if (!src_master && !dst_master) {
      w2(local[e.dst], local[e.src]) = e.weight;
    } else {
      // Only master -> slave arcs exist between the components.
      b.c(local[e.dst], local[e.src]) = e.weight;
    }
  }
  b.l1 = laplacian_from_adjacency(w1);
  b.l2 = laplacian_from_adjacency(w2);
  b.d_c = b.c.rowwise().sum();
  return b;
}

std::vector<bool> reachable_from(const WeightedDigraph& g, NodeId start) {
  auto succ = g.out_neighbors();
  std::vector<bool> seen(g.size(), false);
  std::vector<NodeId> todo{start};
  seen[start] = true;
  while (!todo.empty()) {
    NodeId v = todo.back();
    todo.pop_back();
    for (NodeId w : succ[v]) {
      if (!seen[w]) {
        seen[w] = true;
        todo.push_back(w);
      }
    }
  }
  return seen;
}

bool induces_connected_subgraph(const WeightedDigraph& g, std::span<const NodeId> nodes) {
  if (nodes.empty()) return false;
  std::vector<char> inside(g.size(), 0);
  for (NodeId v : nodes) inside[v] = 1;
  std::vector<std::vector<NodeId>> adj(g.size());
  for (const Edge& e : g.edges()) {
    if (inside[e.src] && inside[e.dst]) {
      adj[e.src].push_back(e.dst);
      adj[e.dst].push_back(e.src);
    }
  }
  std::vector<char> seen(g.size(), 0);
  std::vector<NodeId> todo{nodes.front()};
  seen[nodes.front()] = 1;
  std::size_t count = 1;
  while (!todo.empty()) {
    NodeId v = todo.back();
    todo.pop_back();
    for (NodeId w : adj[v]) {
      if (!seen[w]) {
        seen[w] = 1;
        ++count;
        todo.push_back(w);
      }
    }
  }
  return count == std::set<NodeId>(nodes.begin(), nodes.end()).size();
}

}  // namespace netsync
