#include <random>

#include <benchmark/benchmark.h>

#include "netsync/directed.hpp"
#include "netsync/dynamics.hpp"
#include "netsync/spectral.hpp"
#include "netsync/undirected.hpp"

namespace {

using namespace netsync;

// Ring plus random chords with weights in [0.5, 2].
WeightedDigraph ring_with_chords(NodeId n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> weight(0.5, 2.0), coin(0.0, 1.0);
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n; ++i) {
    for (NodeId j = i + 1; j < n; ++j) {
      if (j == i + 1 || (i == 0 && j == n - 1) || coin(rng) < 4.0 / n) {
        const double w = weight(rng);
        edges.push_back({i, j, w});
        edges.push_back({j, i, w});
      }
    }
  }
  return build_graph(n, edges);
}

// Directed ring master driving a bidirectional ring slave from node 0.
WeightedDigraph master_slave(NodeId n1, NodeId n2) {
  std::vector<Edge> edges;
  for (NodeId i = 0; i < n1; ++i) {
    edges.push_back({i, (i + 1) % n1, 1.0});
    edges.push_back({(i + 1) % n1, i, 0.5 + 0.1 * (i % 3)});
  }
  for (NodeId i = 0; i < n2; ++i) {
    edges.push_back({n1 + i, n1 + (i + 1) % n2, 1.0});
    edges.push_back({n1 + (i + 1) % n2, n1 + i, 1.0});
  }
  edges.push_back({0, n1, 1.0});
  edges.push_back({1, n1 + n2 / 2, 1.0});
  return build_graph(n1 + n2, edges);
}

void BM_SpectralGapUndirected(benchmark::State& state) {
  const LaplacianMatrix l = laplacian(ring_with_chords(state.range(0), 1));
  for (auto _ : state) benchmark::DoNotOptimize(spectral_gap(l));
}
BENCHMARK(BM_SpectralGapUndirected)->Arg(16)->Arg(64)->Arg(256);

void BM_FullSpectrumDirected(benchmark::State& state) {
  const LaplacianMatrix l = laplacian(master_slave(state.range(0) / 2, state.range(0) / 2));
  for (auto _ : state) benchmark::DoNotOptimize(full_spectrum(l));
}
BENCHMARK(BM_FullSpectrumDirected)->Arg(16)->Arg(64)->Arg(256);

void BM_ClassifyAllLinks(benchmark::State& state) {
  const WeightedDigraph g = ring_with_chords(state.range(0), 2);
  for (auto _ : state) benchmark::DoNotOptimize(classify_all_links(g, 1));
}
BENCHMARK(BM_ClassifyAllLinks)->Arg(16)->Arg(64)->Arg(128);

void BM_FdGapSlope(benchmark::State& state) {
  const NodeId n = state.range(0);
  const LaplacianMatrix l = laplacian(ring_with_chords(n, 3));
  const Eigen::MatrixXd p = link_perturbation(n, 0, n / 2);
  for (auto _ : state) benchmark::DoNotOptimize(fd_gap_slope(l, p));
}
BENCHMARK(BM_FdGapSlope)->Arg(16)->Arg(64);

void BM_SingleArcSlopes(benchmark::State& state) {
  const CutsetBlocks b = cutset_blocks(master_slave(state.range(0), state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(single_arc_slopes(b, false, 1));
}
BENCHMARK(BM_SingleArcSlopes)->Arg(4)->Arg(8)->Arg(16);

void BM_HinderingDelta(benchmark::State& state) {
  const CutsetBlocks b = cutset_blocks(master_slave(state.range(0), state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(hindering_delta(b));
}
BENCHMARK(BM_HinderingDelta)->Arg(4)->Arg(16);

// Time units of Rossler network integration per iteration.
void BM_Integrate(benchmark::State& state) {
  SimConfig config;
  config.graph = ring_with_chords(state.range(0), 4);
  config.alpha = 0.5;
  config.t_end = 100;
  const NodeStates x0 = jittered_state(attractor_point(config.local), config.graph.size(), 1e-3, 0);
  for (auto _ : state) benchmark::DoNotOptimize(integrate(config, x0));
  state.SetItemsProcessed(state.iterations() * 10000);
}
BENCHMARK(BM_Integrate)->Arg(5)->Arg(20)->Arg(80)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
