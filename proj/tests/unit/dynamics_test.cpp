#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "netsync/dynamics.hpp"
#include "netsync/error.hpp"
#include "netsync/sim_config.hpp"
#include "netsync/spectral.hpp"
#include "../support/fixtures.hpp"
#include "../support/random_graphs.hpp"

namespace netsync {
namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::kInvalidArgument;
}

WeightedDigraph undirected(NodeId n, std::initializer_list<std::pair<NodeId, NodeId>> pairs) {
  std::vector<Edge> edges;
  for (auto [a, b] : pairs) {
    edges.push_back({a, b, 1.0});
    edges.push_back({b, a, 1.0});
  }
  return build_graph(n, edges);
}

WeightedDigraph path4() { return undirected(4, {{0, 1}, {1, 2}, {2, 3}}); }
WeightedDigraph complete4() { return undirected(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}); }
WeightedDigraph cycle4() { return undirected(4, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}); }

double max_after(const Trajectory& t, double from, double to) {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    if (t.times[i] > from && t.times[i] <= to) worst = std::max(worst, t.sync_error[i]);
  }
  return worst;
}

TEST(RosslerField, PointEvaluations) {
  const RosslerParams p;
  EXPECT_EQ(rossler_field(State3(0, 0, 0), p), State3(0, 0, 0.2));
  const State3 v = rossler_field(State3(1, 1, 1), p);
  EXPECT_DOUBLE_EQ(v(0), -2.0);
  EXPECT_DOUBLE_EQ(v(1), 1.2);
  EXPECT_DOUBLE_EQ(v(2), -5.8);
}

TEST(RosslerField, UncoupledOrbitStaysBounded) {
  SimConfig c;
  c.t_end = 1000;
  c.save_stride = 1;
  NodeStates x0(1, 3);
  x0 << 1, 1, 1;
  const Trajectory t = integrate(c, x0);
  double worst = 0.0;
  for (const NodeStates& s : t.states) worst = std::max(worst, s.cwiseAbs().maxCoeff());
  EXPECT_LE(worst, 50.0);
  EXPECT_GT(worst, 5.0);
}

TEST(Integrate, SynchronousManifoldIsInvariant) {
  testing::Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    SimConfig c;
    c.graph = trial % 2 ? testing::random_connected_undirected(rng, 6, 0.4, true)
                        : testing::random_master_slave(rng, 3, 3, 1.0, 1.0);
    c.alpha = 0.5 * trial;
    c.t_end = 200;
    c.save_stride = 10;
    const NodeStates x0 = jittered_state(attractor_point(c.local), c.graph.size(), 0.0, 0);
    const Trajectory t = integrate(c, x0);
    EXPECT_EQ(t.times.size(), t.states.size());
    EXPECT_EQ(t.times.size(), t.sync_error.size());
    for (double e : t.sync_error) EXPECT_LE(e, 1e-9);
  }
}

TEST(Integrate, UncoupledChaosDiverges) {
  SimConfig c;
  c.graph = complete4();
  c.alpha = 0.0;
  c.t_end = 500;
  const Trajectory t = integrate(c, jittered_state(attractor_point(c.local), 4, 1e-3, 1));
  EXPECT_GT(t.sync_error.back(), 1e-1);
}

TEST(Integrate, SamplingGrid) {
  SimConfig c;
  c.graph = path4();
  c.alpha = 1.0;
  c.t_end = 1.1;
  c.save_stride = 25;
  const Trajectory t = integrate(c, jittered_state(State3(1, 1, 1), 4, 1e-3, 0));
  ASSERT_EQ(t.times.size(), 6u);
  EXPECT_DOUBLE_EQ(t.times[4], 1.0);
  EXPECT_NEAR(t.times.back(), 1.1, 1e-12);
  EXPECT_NEAR(t.final_time, 1.1, 1e-12);
}

TEST(Integrate, EventMatchesManualResume) {
  SimConfig with;
  with.graph = testing::load("master_slave.edges");
  with.alpha = 0.3;
  with.t_end = 100;
  with.save_stride = 50;
  with.events = {{50.0, 3, 1, 2.0}};
  const NodeStates x0 = jittered_state(attractor_point(with.local), 5, 1e-3, 9);
  const Trajectory full = integrate(with, x0);
  ASSERT_EQ(full.events_applied.size(), 1u);

  SimConfig first = with;
  first.events.clear();
  first.t_end = 50;
  const Trajectory a = integrate(first, x0);
  SimConfig second = first;
  second.graph = a.final_graph.with_added_weight(3, 1, 2.0);
  second.t_start = 50;
  second.t_end = 100;
  const Trajectory b = integrate(second, a.final_state);

  std::vector<double> times = a.times;
  std::vector<NodeStates> states = a.states;
  times.insert(times.end(), b.times.begin() + 1, b.times.end());
  states.insert(states.end(), b.states.begin() + 1, b.states.end());
  ASSERT_EQ(times, full.times);
  for (std::size_t i = 0; i < states.size(); ++i) {
    EXPECT_LE((states[i] - full.states[i]).cwiseAbs().maxCoeff(), 1e-12);
  }
  EXPECT_EQ(full.final_graph.weight(3, 1), 2.0);
}

TEST(Integrate, StepHalvingConsistent) {
  SimConfig c;
  c.graph = complete4();
  c.alpha = 0.5;
  c.t_end = 6;
  const NodeStates x0 = jittered_state(attractor_point(c.local), 4, 1e-3, 4);
  const double coarse = integrate(c, x0).sync_error.back();
  c.dt = 0.005;
  c.save_stride = 200;
  const double fine = integrate(c, x0).sync_error.back();
  EXPECT_LT(coarse, 1e-4);
  EXPECT_LT(std::abs(coarse - fine), 0.05 * fine);
}

TEST(Integrate, BlowUpAndValidation) {
  SimConfig c;
  c.graph = complete4();
  c.alpha = 200.0;
  c.dt = 0.1;
  const NodeStates x0 = jittered_state(State3(1, 1, 1), 4, 1e-1, 0);
  EXPECT_EQ(kind_of([&] { integrate(c, x0); }), ErrorKind::kBlowUp);

  SimConfig bad;
  bad.dt = 0;
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::kInvalidArgument);
  bad = SimConfig{};
  bad.coupling = -Eigen::Matrix3d::Identity();
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::kInvalidArgument);
  bad = SimConfig{};
  bad.graph = complete4();
  bad.events = {{200.0, 0, 1, 1.0}};
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::kInvalidArgument);
  bad.events = {{20.0, 0, 9, 1.0}};
  EXPECT_EQ(kind_of([&] { validate(bad); }), ErrorKind::kIndexOutOfRange);
  EXPECT_EQ(kind_of([&] { integrate(SimConfig{}, NodeStates::Zero(2, 3)); }), ErrorKind::kInvalidArgument);
}

TEST(SyncSeries, IdenticalAndConstant) {
  Trajectory t;
  t.times = {0, 1, 2};
  NodeStates same(3, 3);
  same.rowwise() = Eigen::RowVector3d(1, 2, 3);
  for (int i = 0; i < 3; ++i) {
    t.states.push_back(same);
    t.sync_error.push_back(sync_error(same));
  }
  const SyncSeries zero = sync_error_series(t, 0, 2);
  for (double e : zero.errors) EXPECT_EQ(e, 0.0);
  EXPECT_FALSE(zero.decay_rate);

  NodeStates two(2, 3);
  two << 0, 0, 0, 3, 4, 0;
  EXPECT_DOUBLE_EQ(sync_error(two), 5.0);
  t.sync_error.assign(3, sync_error(two));
  const SyncSeries constant = sync_error_series(t, 0, 2);
  for (double e : constant.errors) EXPECT_DOUBLE_EQ(e, 5.0);
  ASSERT_TRUE(constant.decay_rate);
  EXPECT_NEAR(*constant.decay_rate, 0.0, 1e-12);
}

TEST(SyncSeries, DecayRateSteepensWithCoupling) {
  std::vector<double> rates;
  for (double alpha : {0.5, 1.0, 2.0}) {
    SimConfig c;
    c.graph = complete4();
    c.alpha = alpha;
    c.t_end = 5;
    c.save_stride = 10;
    const Trajectory t = integrate(c, jittered_state(attractor_point(c.local), 4, 1e-3, 2));
    const SyncSeries s = sync_error_series(t, 0.5, 2.5);
    ASSERT_TRUE(s.decay_rate);
    rates.push_back(*s.decay_rate);
  }
  EXPECT_LT(rates[0], 0.0);
  EXPECT_LT(rates[1], rates[0]);
  EXPECT_LT(rates[2], rates[1]);
}

TEST(AlphaC, CompleteGraphBeatsPath) {
  AlphaCProtocol protocol;
  protocol.alpha_max = 1.0;
  protocol.seed = 3;
  const double path = estimate_alpha_c(path4(), RosslerParams{}, Eigen::Matrix3d::Identity(), protocol);
  const double complete = estimate_alpha_c(complete4(), RosslerParams{}, Eigen::Matrix3d::Identity(), protocol);
  EXPECT_LT(complete, path);
  const double cycle = estimate_alpha_c(cycle4(), RosslerParams{}, Eigen::Matrix3d::Identity(), protocol);
  // Scaled by lambda2 the thresholds agree: 2 - sqrt 2, 2 and 4.
  const double ref = cycle * 2.0;
  EXPECT_NEAR(path * (2.0 - std::sqrt(2.0)) / ref, 1.0, 0.25);
  EXPECT_NEAR(complete * 4.0 / ref, 1.0, 0.25);
  EXPECT_LE(cycle, path * 1.1);
}

TEST(AlphaC, NoBracket) {
  AlphaCProtocol protocol;
  protocol.alpha_max = 0.01;
  protocol.t_end = 200;
  EXPECT_EQ(kind_of([&] { estimate_alpha_c(path4(), RosslerParams{}, Eigen::Matrix3d::Identity(), protocol); }),
            ErrorKind::kNoBracket);
  protocol.alpha_min = 2.0;
  protocol.alpha_max = 3.0;
  EXPECT_EQ(kind_of([&] { estimate_alpha_c(path4(), RosslerParams{}, Eigen::Matrix3d::Identity(), protocol); }),
            ErrorKind::kNoBracket);
}

class LinkInsertion : public ::testing::Test {
 protected:
  static Trajectory run(std::vector<LinkEvent> events) {
    SimConfig c;
    c.graph = testing::load("master_slave.edges");
    c.alpha = 0.088;
    c.t_end = 8000;
    c.seed = 7;
    c.event_jitter = 1e-8;
    c.events = std::move(events);
    return integrate(c, jittered_state(attractor_point(c.local), 5, 1e-3, 7));
  }
};

TEST_F(LinkInsertion, HinderingArcDesynchronizes) {
  const Trajectory t = run({{4000, 3, 1, 2.0}});
  EXPECT_LT(max_after(t, 3000, 4000), 1e-6);
  EXPECT_GT(max_after(t, 4000, 8000), 1e-1);
}

TEST_F(LinkInsertion, ImprovingArcsKeepSynchrony) {
  const Trajectory t = run({{4000, 3, 0, 0.1}, {4000, 3, 1, 0.1}, {4000, 3, 2, 0.1}});
  EXPECT_EQ(t.events_applied.size(), 3u);
  EXPECT_LT(max_after(t, 3000, 8000), 1e-6);
}

TEST(SimConfigFile, ParsesAllKeys) {
  std::istringstream in(
      "# comment\n"
      "graph = master_slave.edges\n"
      "alpha = 0.12\n"
      "a = 0.2\nb = 0.2\nc = 5.7\n"
      "coupling = 1 0 0 0 1 0 0 0 2\n"
      "dt = 0.005\nt_end = 100\nseed = 11\nsave_stride = 20\n"
      "jitter = 1e-4\nevent_jitter = 1e-8\n"
      "event = 40 4 2 2\n"
      "initial = 1 2 3\n");
  const SimSpec s = parse_sim_config(in, NETSYNC_FIXTURE_DIR);
  EXPECT_EQ(s.config.graph.size(), 5);
  EXPECT_DOUBLE_EQ(s.config.alpha, 0.12);
  EXPECT_DOUBLE_EQ(s.config.local.c, 5.7);
  EXPECT_DOUBLE_EQ(s.config.coupling(2, 2), 2.0);
  EXPECT_EQ(s.config.seed, 11u);
  EXPECT_EQ(s.config.save_stride, 20);
  ASSERT_EQ(s.config.events.size(), 1u);
  EXPECT_EQ(s.config.events[0].src, 3);
  EXPECT_EQ(s.config.events[0].dst, 1);
  ASSERT_TRUE(s.initial);
  const NodeStates x0 = initial_state(s);
  EXPECT_LE((x0.row(0) - Eigen::RowVector3d(1, 2, 3)).cwiseAbs().maxCoeff(), 1e-4);
}

TEST(SimConfigFile, ErrorsCarryLineNumbers) {
  auto parse = [](const std::string& text) {
    std::istringstream in(text);
    return parse_sim_config(in, NETSYNC_FIXTURE_DIR);
  };
  try {
    parse("graph = p3.edges\nspeed = 3\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kParseError);
    EXPECT_NE(std::string(e.what()).find("config line 2"), std::string::npos);
  }
  EXPECT_EQ(kind_of([&] { parse("alpha = 1\n"); }), ErrorKind::kParseError);
  EXPECT_EQ(kind_of([&] { parse("graph = p3.edges\nalpha = x\n"); }), ErrorKind::kParseError);
  EXPECT_EQ(kind_of([&] { parse("graph = p3.edges\nevent = 10 1 7 1\n"); }), ErrorKind::kIndexOutOfRange);
}

TEST(SimConfigFile, CsvExport) {
  SimConfig c;
  c.graph = path4();
  c.alpha = 1.0;
  c.t_end = 0.02;
  c.save_stride = 1;
  const Trajectory t = integrate(c, jittered_state(State3(1, 1, 1), 4, 1e-3, 0));
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream lines(out.str());
  std::string header, row;
  std::getline(lines, header);
  EXPECT_EQ(header.rfind("t,sync_error,x_1_1,x_1_2,x_1_3,x_2_1", 0), 0u);
  EXPECT_NE(header.find("x_4_3"), std::string::npos);
  int rows = 0;
  while (std::getline(lines, row)) {
    ++rows;
    EXPECT_EQ(std::count(row.begin(), row.end(), ','), 13);
  }
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace netsync
