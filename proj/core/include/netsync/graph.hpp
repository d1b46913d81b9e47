#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace netsync {

using NodeId = Eigen::Index;

// A weighted arc src -> dst. In the coupled system node dst is driven by
// node src, so the arc lands in adjacency entry W(dst, src).
struct Edge {
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Validated, immutable weighted digraph on nodes 0..n-1.
//
// Invariants: indices in range, no self-loops, strictly positive weights, at
// most one arc per ordered pair. Arcs are stored sorted by (src, dst).
class WeightedDigraph {
 public:
  NodeId size() const { return n_; }
  std::span<const Edge> edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }

  // True when some arc has no reverse arc of equal weight.
  bool directed() const { return directed_; }

  // Weight of arc src -> dst, or 0 when absent.
  double weight(NodeId src, NodeId dst) const;
  bool has_edge(NodeId src, NodeId dst) const;

  // W(i, j) = weight of arc j -> i.
  Eigen::MatrixXd adjacency() const;

  // Copy with `weight` added to arc src -> dst (inserted if absent).
  WeightedDigraph with_added_weight(NodeId src, NodeId dst, double weight) const;

  // Successor lists (src -> dst) for traversals.
  std::vector<std::vector<NodeId>> out_neighbors() const;

 private:
  friend WeightedDigraph build_graph(NodeId n, std::vector<Edge> edges);

  WeightedDigraph(NodeId n, std::vector<Edge> edges, bool directed)
      : n_(n), edges_(std::move(edges)), directed_(directed) {}

  NodeId n_ = 0;
  std::vector<Edge> edges_;
  bool directed_ = false;
};

// Throws Error{kIndexOutOfRange, kSelfLoop, kNonPositiveWeight,
// kDuplicateEdge} naming the offending edge.
WeightedDigraph build_graph(NodeId n, std::vector<Edge> edges);

// Dense graph Laplacian L = D - W with zero row sums.
class LaplacianMatrix {
 public:
  // Checks zero row sums, nonpositive off-diagonal and nonnegative diagonal.
  explicit LaplacianMatrix(Eigen::MatrixXd entries);

  const Eigen::MatrixXd& matrix() const { return entries_; }
  NodeId size() const { return entries_.rows(); }
  bool is_symmetric() const;

 private:
  Eigen::MatrixXd entries_;
};

LaplacianMatrix laplacian(const WeightedDigraph& g);

// Laplacian built directly from an adjacency matrix (W(i, j) = weight j -> i).
Eigen::MatrixXd laplacian_from_adjacency(const Eigen::MatrixXd& w);

struct CondensationReport {
  // Strong components; each list is sorted ascending. Components are ordered
  // topologically: every dag edge goes from a lower to a higher index.
  std::vector<std::vector<NodeId>> components;
  std::vector<std::size_t> component_of;
  // (from, to) pairs between component indices, deduplicated.
  std::vector<std::pair<std::size_t, std::size_t>> dag_edges;
  // Components with no incoming cutset.
  std::vector<std::size_t> root_components;
  // Exactly one root component, i.e. a spanning diverging tree exists.
  bool has_spanning_tree = false;
};

CondensationReport condensation(const WeightedDigraph& g);

// Block form of a two-strong-component Laplacian with master (root) nodes
// listed first:
//
//   [ l1      0        ]
//   [ -c   l2 + diag(d_c) ]
struct CutsetBlocks {
  Eigen::MatrixXd l1;
  Eigen::MatrixXd l2;
  Eigen::MatrixXd c;    // slave x master, nonnegative
  Eigen::VectorXd d_c;  // row sums of c
  std::vector<NodeId> master_nodes;
  std::vector<NodeId> slave_nodes;

  NodeId master_size() const { return l1.rows(); }
  NodeId slave_size() const { return l2.rows(); }

  // l2 + diag(d_c)
  Eigen::MatrixXd slave_operator() const;
  // The block matrix above, in block (master-first) ordering.
  Eigen::MatrixXd assemble() const;
  // Maps a matrix given in block ordering back to original node ordering.
  Eigen::MatrixXd to_original(const Eigen::MatrixXd& block_ordered) const;
  // Original node id of block position p.
  NodeId original_node(NodeId block_position) const;
};

// Throws kNotTwoComponents (not exactly two strong components) or
// kNoSpanningTree (two components without a cutset between them).
CutsetBlocks cutset_blocks(const WeightedDigraph& g);

// Nodes reachable from `start` following arcs forward.
std::vector<bool> reachable_from(const WeightedDigraph& g, NodeId start);

// True when the subgraph induced by `nodes` is connected, ignoring arc
// direction. The empty set counts as disconnected.
bool induces_connected_subgraph(const WeightedDigraph& g, std::span<const NodeId> nodes);

}  // namespace netsync
