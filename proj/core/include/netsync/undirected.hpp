#pragma once

#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "netsync/graph.hpp"

namespace netsync {

// Gap slopes for adding unit weight between k and l, from the Fiedler vector v:
//   s_undirected = (v_k - v_l)^2, s_forward = v_l (v_l - v_k) for k -> l,
//   s_backward = v_k (v_k - v_l) for l -> k.
struct LinkSlopes {
  NodeId k = 0;
  NodeId l = 0;
  double s_undirected = 0.0;
  double s_forward = 0.0;
  double s_backward = 0.0;
};

inline constexpr double kNeutralSlopeTol = 1e-10;
inline constexpr double kZeroEntryTol = 1e-10;

// Throws kNotUndirected, kNotConnected, kGapNotSimple.
LinkSlopes link_slopes(const WeightedDigraph& g, NodeId k, NodeId l);

// Slopes for (k, l) from a precomputed Fiedler vector.
LinkSlopes link_slopes_from_fiedler(const Eigen::VectorXd& fiedler, NodeId k, NodeId l);

struct FiedlerPartition {
  std::vector<NodeId> g1;  // fiedler >= 0 (entries within kZeroEntryTol of 0 included)
  std::vector<NodeId> g2;
  Eigen::VectorXd fiedler;
  double lambda2 = 0.0;
  // Increasing chains G_{1i} (grown from g1 into g2) and G_{2i} (from g2 into g1).
  std::vector<std::vector<NodeId>> cascade1;
  std::vector<std::vector<NodeId>> cascade2;
  // Set when some Fiedler entry is numerically zero (non-generic weights).
  bool degraded_genericity = false;
  std::vector<NodeId> zero_entries;
};

// Throws kNotUndirected, kNotConnected, kGapNotSimple.
FiedlerPartition fiedler_partition(const WeightedDigraph& g);

// Chain of node sets {i : v_i >= t - eps} over the distinct negative entries
// t of v in decreasing order, eps half the smallest gap between them.
std::vector<std::vector<NodeId>> destabilization_cascade(const Eigen::VectorXd& v);

enum class Effect { kImproves, kHinders, kNeutral };

std::string_view to_string(Effect e);
Effect classify_slope(double slope);

struct LinkRecord {
  LinkSlopes slopes;
  Effect effect = Effect::kNeutral;  // sign of s_forward
};

struct LinkTable {
  Eigen::VectorXd fiedler;
  double lambda2 = 0.0;
  // Every ordered pair (k, l), k != l, in row-major order.
  std::vector<LinkRecord> records;
};

// threads == 0 picks the hardware concurrency.
LinkTable classify_all_links(const WeightedDigraph& g, unsigned threads = 1);

struct TwinPair {
  NodeId k = 0;
  NodeId l = 0;
  bool predicted_neutral = false;
};

// Unordered pairs k < l whose weight rows agree off the {k, l} columns.
// predicted_neutral is set when d_k + W_kl > N/(N-1) * d_min, the condition
// under which e_k - e_l is an eigenvector strictly above lambda2. Every
// unweighted pair with d_k > d_min satisfies it.
// Throws kNotUndirected.
std::vector<TwinPair> twin_node_pairs(const WeightedDigraph& g);

}  // namespace netsync
