#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "netsync/graph.hpp"

namespace netsync {

struct RosslerParams {
  double a = 0.2;
  double b = 0.2;
  double c = 7.0;
};

using State3 = Eigen::Vector3d;
// One row per node.
using NodeStates = Eigen::Matrix<double, Eigen::Dynamic, 3, Eigen::RowMajor>;

// (-(x2 + x3), x1 + a x2, b + x3 (x1 - c))
State3 rossler_field(const State3& x, const RosslerParams& p);

// Adds weight to arc src -> dst at the given time (0-based ids).
struct LinkEvent {
  double time = 0.0;
  NodeId src = 0;
  NodeId dst = 0;
  double weight = 1.0;
};

struct SimConfig {
  WeightedDigraph graph = build_graph(1, {});
  double alpha = 0.0;
  RosslerParams local;
  Eigen::Matrix3d coupling = Eigen::Matrix3d::Identity();
  double dt = 0.01;
  double t_start = 0.0;
  double t_end = 100.0;
  std::vector<LinkEvent> events;
  std::uint64_t seed = 0;
  // Samples are taken at global steps that are multiples of save_stride.
  int save_stride = 100;
  // Uniform initial jitter amplitude around the synchronous state.
  double jitter = 1e-3;
  // Uniform kick added to every state component when an event fires.
  double event_jitter = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<NodeStates> states;
  std::vector<double> sync_error;
  std::vector<LinkEvent> events_applied;
  NodeStates final_state;
  double final_time = 0.0;
  WeightedDigraph final_graph = build_graph(1, {});
};

// Max pairwise Euclidean distance between node states.
double sync_error(const NodeStates& x);

// Throws kInvalidArgument for a malformed config.
void validate(const SimConfig& config);

// Fixed-step RK4 of dx_i/dt = f(x_i) + alpha sum_j W_ij Gamma (x_j - x_i).
// Time is global_step * dt so resumed runs share the sampling grid.
// Throws kBlowUp when a state entry leaves [-1e6, 1e6] or turns non-finite.
Trajectory integrate(const SimConfig& config, const NodeStates& x0);

// A point on the uncoupled attractor, reached from (1, 1, 1) after a transient.
State3 attractor_point(const RosslerParams& p, double transient = 200.0, double dt = 0.01);

// base repeated on every row plus seeded uniform noise in [-amplitude, amplitude].
NodeStates jittered_state(const State3& base, NodeId n, double amplitude, std::uint64_t seed);

struct SyncSeries {
  std::vector<double> errors;
  // Least-squares slope of log(error) against t over the fit window, using
  // samples with positive error; nullopt with fewer than two such samples.
  std::optional<double> decay_rate;
};

SyncSeries sync_error_series(const Trajectory& traj, double fit_from, double fit_to);

// True when every sample in the final `tail` fraction of [from, to] lies
// below threshold.
bool is_synchronized(const Trajectory& traj, double threshold = 1e-6, double tail = 0.1);
bool is_synchronized(const Trajectory& traj, double from, double to, double threshold,
                     double tail);

struct AlphaCProtocol {
  double alpha_min = 0.0;
  double alpha_max = 5.0;
  int iterations = 12;
  double t_end = 600.0;
  double dt = 0.01;
  double jitter = 1e-3;
  std::uint64_t seed = 0;
  double threshold = 1e-6;
};

// Bisection on alpha for the synchronization threshold.
// Throws kNoBracket when alpha_min already synchronizes or alpha_max does not.
double estimate_alpha_c(const WeightedDigraph& g, const RosslerParams& p,
                        const Eigen::Matrix3d& coupling, const AlphaCProtocol& protocol);

}  // namespace netsync
