#include "netsync/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "netsync/error.hpp"

namespace netsync {
namespace {

constexpr double kBlowUpLimit = 1e6;

long long to_step(double t, double dt) { return std::llround(t / dt); }

struct Coupler {
  std::vector<Edge> edges;
  double alpha = 0.0;
  Eigen::Matrix3d gamma;
  bool identity = true;

  void add_into(const NodeStates& x, NodeStates& out) const {
    for (const Edge& e : edges) {
      const Eigen::RowVector3d diff = x.row(e.src) - x.row(e.dst);
      const double gain = alpha * e.weight;
      if (identity) {
        out.row(e.dst) += gain * diff;
      } else {
        out.row(e.dst) += gain * (gamma * diff.transpose()).transpose();
      }
    }
  }
};

Coupler make_coupler(const WeightedDigraph& g, double alpha, const Eigen::Matrix3d& gamma) {
  Coupler c;
  c.edges.assign(g.edges().begin(), g.edges().end());
  c.alpha = alpha;
  c.gamma = gamma;
  c.identity = gamma == Eigen::Matrix3d::Identity();
  return c;
}

void field(const NodeStates& x, const RosslerParams& p, const Coupler& coupler, NodeStates& out) {
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double x1 = x(i, 0), x2 = x(i, 1), x3 = x(i, 2);
    out(i, 0) = -(x2 + x3);
    out(i, 1) = x1 + p.a * x2;
    out(i, 2) = p.b + x3 * (x1 - p.c);
  }
  coupler.add_into(x, out);
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

}  // namespace

State3 rossler_field(const State3& x, const RosslerParams& p) {
  return {-(x(1) + x(2)), x(0) + p.a * x(1), p.b + x(2) * (x(0) - p.c)};
}

double sync_error(const NodeStates& x) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = i + 1; j < x.rows(); ++j)
      worst = std::max(worst, (x.row(i) - x.row(j)).squaredNorm());
  return std::sqrt(worst);
}

void validate(const SimConfig& c) {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::kInvalidArgument, what); };
  if (!(c.dt > 0.0) || !std::isfinite(c.dt)) bad("dt must be positive");
  if (!(c.t_end > c.t_start) || !std::isfinite(c.t_end)) bad("t_end must exceed t_start");
  if (!(c.t_start >= 0.0)) bad("t_start must be nonnegative");
  if (!(c.alpha >= 0.0) || !std::isfinite(c.alpha)) bad("alpha must be nonnegative");
  if (c.save_stride < 1) bad("save_stride must be at least 1");
  if (!(c.jitter >= 0.0) || !(c.event_jitter >= 0.0)) bad("jitter amplitudes must be nonnegative");
  const Eigen::Vector3cd eig = c.coupling.eigenvalues();
  for (int i = 0; i < 3; ++i) {
    if (std::abs(eig(i).imag()) > 1e-12 || !(eig(i).real() > 0.0)) {
      bad("coupling matrix needs real positive eigenvalues");
    }
  }
  for (const LinkEvent& e : c.events) {
    if (!(e.time > c.t_start && e.time < c.t_end)) {
      bad("event time " + fmt(e.time) + " outside (t_start, t_end)");
    }
    if (e.src < 0 || e.dst < 0 || e.src >= c.graph.size() || e.dst >= c.graph.size()) {
      throw Error(ErrorKind::kIndexOutOfRange, "event arc references a missing node");
    }
    if (e.src == e.dst) throw Error(ErrorKind::kSelfLoop, "event arc is a self-loop");
    if (!(e.weight > 0.0) || !std::isfinite(e.weight)) {
      throw Error(ErrorKind::kNonPositiveWeight, "event weight " + fmt(e.weight));
    }
  }
}

Trajectory integrate(const SimConfig& config, const NodeStates& x0) {
  validate(config);
  const NodeId n = config.graph.size();
  if (x0.rows() != n) {
    throw Error(ErrorKind::kInvalidArgument, "initial state has " + std::to_string(x0.rows()) +
                                                 " rows for " + std::to_string(n) + " nodes");
  }
  if (!x0.allFinite()) throw Error(ErrorKind::kInvalidArgument, "initial state is not finite");

  const double dt = config.dt;
  const long long first = to_step(config.t_start, dt);
  const long long last = to_step(config.t_end, dt);

  std::vector<LinkEvent> events = config.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const LinkEvent& a, const LinkEvent& b) { return a.time < b.time; });

  Trajectory traj;
  traj.final_graph = config.graph;
  Coupler coupler = make_coupler(traj.final_graph, config.alpha, config.coupling);

  NodeStates x = x0, k1(n, 3), k2(n, 3), k3(n, 3), k4(n, 3), tmp(n, 3);
  auto record = [&](long long step) {
    traj.times.push_back(static_cast<double>(step) * dt);
    traj.states.push_back(x);
    traj.sync_error.push_back(sync_error(x));
  };

  std::size_t next_event = 0;
  for (long long step = first;; ++step) {
    if (step % config.save_stride == 0 || step == last) record(step);
    if (step == last) break;

    while (next_event < events.size() && to_step(events[next_event].time, dt) <= step) {
      LinkEvent e = events[next_event];
      e.time = static_cast<double>(step) * dt;
      traj.final_graph = traj.final_graph.with_added_weight(e.src, e.dst, e.weight);
      coupler = make_coupler(traj.final_graph, config.alpha, config.coupling);
      if (config.event_jitter > 0.0) {
        std::mt19937_64 rng(config.seed + 0x9E3779B97F4A7C15ULL * (next_event + 1));
        std::uniform_real_distribution<double> kick(-config.event_jitter, config.event_jitter);
        for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] += kick(rng);
      }
      traj.events_applied.push_back(e);
      ++next_event;
    }

    field(x, config.local, coupler, k1);
    tmp = x + (0.5 * dt) * k1;
    field(tmp, config.local, coupler, k2);
    tmp = x + (0.5 * dt) * k2;
    field(tmp, config.local, coupler, k3);
    tmp = x + dt * k3;
    field(tmp, config.local, coupler, k4);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kBlowUpLimit) {
      throw Error(ErrorKind::kBlowUp,
                  "state left [-1e6, 1e6] at t = " + fmt(static_cast<double>(step + 1) * dt) +
                      " (unstable dynamics or dt too large)");
    }
  }
  traj.final_state = x;
  traj.final_time = static_cast<double>(last) * dt;
  return traj;
}

State3 attractor_point(const RosslerParams& p, double transient, double dt) {
  State3 x(1.0, 1.0, 1.0);
  const long long steps = to_step(transient, dt);
  for (long long s = 0; s < steps; ++s) {
    const State3 k1 = rossler_field(x, p);
    const State3 k2 = rossler_field(x + 0.5 * dt * k1, p);
    const State3 k3 = rossler_field(x + 0.5 * dt * k2, p);
    const State3 k4 = rossler_field(x + dt * k3, p);
    x += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return x;
}

NodeStates jittered_state(const State3& base, NodeId n, double amplitude, std::uint64_t seed) {
  NodeStates x(n, 3);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(-amplitude, amplitude);
  for (NodeId i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) x(i, d) = base(d) + (amplitude > 0.0 ? noise(rng) : 0.0);
  }
  return x;
}

SyncSeries sync_error_series(const Trajectory& traj, double fit_from, double fit_to) {
  SyncSeries out;
  out.errors = traj.sync_error;
  double st = 0, sy = 0, stt = 0, sty = 0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i], e = traj.sync_error[i];
    if (t < fit_from || t > fit_to || !(e > 0.0)) continue;
    const double y = std::log(e);
    st += t;
    sy += y;
    stt += t * t;
    sty += t * y;
    ++count;
  }
  if (count >= 2) {
    const double m = static_cast<double>(count);
    const double denom = m * stt - st * st;
    if (denom > 0.0) out.decay_rate = (m * sty - st * sy) / denom;
  }
  return out;
}

bool is_synchronized(const Trajectory& traj, double from, double to, double threshold,
                     double tail) {
  const double start = to - tail * (to - from);
  bool any = false;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const double t = traj.times[i];
    if (t < start - 1e-12 || t > to + 1e-12) continue;
    any = true;
    if (!(traj.sync_error[i] < threshold)) return false;
  }
  return any;
}

bool is_synchronized(const Trajectory& traj, double threshold, double tail) {
  if (traj.times.empty()) return false;
  return is_synchronized(traj, traj.times.front(), traj.times.back(), threshold, tail);
}

double estimate_alpha_c(const WeightedDigraph& g, const RosslerParams& p,
                        const Eigen::Matrix3d& coupling, const AlphaCProtocol& protocol) {
  if (!(protocol.alpha_max > protocol.alpha_min) || protocol.alpha_min < 0.0 ||
      protocol.iterations < 1) {
    throw Error(ErrorKind::kInvalidArgument, "need 0 <= alpha_min < alpha_max and iterations >= 1");
  }
  const NodeStates x0 =
      jittered_state(attractor_point(p), g.size(), protocol.jitter, protocol.seed);
  SimConfig config;
  config.graph = g;
  config.local = p;
  config.coupling = coupling;
  config.dt = protocol.dt;
  config.t_end = protocol.t_end;
  config.seed = protocol.seed;
  config.save_stride = std::max(1, static_cast<int>(std::llround(protocol.t_end / protocol.dt / 1000)));

  auto synchronizes = [&](double alpha) {
    config.alpha = alpha;
    try {
      return is_synchronized(integrate(config, x0), protocol.threshold, 0.1);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::kBlowUp) return false;
      throw;
    }
  };
  if (synchronizes(protocol.alpha_min)) {
    throw Error(ErrorKind::kNoBracket, "already synchronized at alpha_min = " + fmt(protocol.alpha_min));
  }
  if (!synchronizes(protocol.alpha_max)) {
    throw Error(ErrorKind::kNoBracket, "not synchronized at alpha_max = " + fmt(protocol.alpha_max));
  }
  double lo = protocol.alpha_min, hi = protocol.alpha_max;
  for (int it = 0; it < protocol.iterations; ++it) {
    const double mid = 0.5 * (lo + hi);
    (synchronizes(mid) ? hi : lo) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace netsync
