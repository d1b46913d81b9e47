#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "netsync/graph.hpp"
#include "netsync/spectral.hpp"
#include "netsync/undirected.hpp"

namespace netsync {

// Minimal eigenvalue of the slave operator l2 + diag(d_c) with its positive
// left/right eigenvectors. y is scaled to max entry 1 and w^T y = 1.
struct SlaveEig {
  double mu = 0.0;
  double shift = 0.0;       // s in N = s I - (l2 + diag(d_c))
  double perron_root = 0.0;  // Perron root of N, mu = shift - perron_root
  Eigen::VectorXd w;
  Eigen::VectorXd y;
};

// Throws kNotIrreducible (slave not strongly connected), kInvalidArgument (no
// cutset), kConvergenceFailure.
SlaveEig slave_min_eig(const CutsetBlocks& blocks);

// Eigen-decomposition of the master Laplacian l1 with X_1 = (1, ..., 1).
struct MasterEigenbasis {
  Eigen::VectorXcd alphas;
  Eigen::MatrixXcd basis_vectors;  // columns X_k
  Eigen::MatrixXcd left_vectors;   // columns u_k, u_k^T X_j = delta_kj
  double condition = 1.0;
  bool diagonalizable = true;
  bool zero_column_sums = false;
};

MasterEigenbasis master_eigenbasis(const CutsetBlocks& blocks);

// lambda2 of the assembled Laplacian and whether it belongs to sigma(l1)
// (master) or sigma(l2 + diag(d_c)) (slave).
// Throws kGapNotSimple, kAmbiguousLocation.
GapInfo gap_location(const CutsetBlocks& blocks);

enum class Direction { kForward, kBackward };
std::string_view to_string(Direction d);

struct PerturbationReport {
  // forward: n2 x n1 (slave row receives from master column);
  // backward: n1 x n2 (master row receives from slave column).
  Eigen::MatrixXd delta;
  Direction direction = Direction::kForward;
  double slope = 0.0;
  std::optional<double> fd_slope;
  Effect classification = Effect::kNeutral;
  std::string construction;
  std::vector<std::string> notes;
};

// Block-ordered Laplacian change produced by delta.
Eigen::MatrixXd perturbation_matrix(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta,
                                    Direction direction);

// Throws kGapNotSimple, kInvalidArgument (bad shape, negative or zero delta).
PerturbationReport forward_slope(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta);

// Throws kGapInMaster, kSingularShift, kInvalidArgument.
PerturbationReport backward_slope(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta);

// All master nodes receive from slave node k with weight 1 / y_k, so that
// delta * y = 1. Throws kGapInMaster, kIndexOutOfRange.
PerturbationReport improving_delta(const CutsetBlocks& blocks, NodeId slave_node);

struct ImprovingNodes {
  std::vector<NodeId> nodes;     // master-local indices
  Eigen::VectorXd beta1;          // beta_1(e_k), sums to 1
  double delta_threshold = 0.0;   // +inf for a single-node master
  bool zero_column_sums = false;
};

// Throws kNotDiagonalizable, kGapInMaster.
ImprovingNodes single_link_improving_nodes(const CutsetBlocks& blocks);

// Entrywise -(l1 - lambda I)^{-1} e_k.
Eigen::VectorXd master_resolvent_column(const CutsetBlocks& blocks, double lambda, NodeId k);

// Nonnegative delta (n1 x n2) with delta * y = target. Sparse form puts all
// weight in the column of the largest y entry (ties to the lowest index);
// otherwise delta = target * y^T / |y|^2.
Eigen::MatrixXd realize_delta(const Eigen::VectorXd& target, const Eigen::VectorXd& y,
                              bool sparse);

// Backward perturbation certified to lower lambda2, or nullopt when no real
// master eigenvalue qualifies. Throws kNotDiagonalizable, kGapInMaster.
std::optional<PerturbationReport> hindering_delta(const CutsetBlocks& blocks);

struct ArcSlope {
  NodeId src = 0;  // original node ids
  NodeId dst = 0;
  Direction direction = Direction::kForward;
  double slope = 0.0;
  std::optional<double> fd_slope;
  Effect classification = Effect::kNeutral;
};

struct ArcSlopeTable {
  GapInfo gap;
  std::vector<ArcSlope> forward;   // every master -> slave pair
  std::vector<ArcSlope> backward;  // every slave -> master pair; empty when the gap is in the master
};

// Unit-weight single-arc slopes in both directions. threads == 0 picks the
// hardware concurrency.
ArcSlopeTable single_arc_slopes(const CutsetBlocks& blocks, bool with_fd, unsigned threads = 1);

}  // namespace netsync
