#include "netsync/undirected.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <thread>

#include "netsync/error.hpp"
#include "netsync/spectral.hpp"

namespace netsync {
namespace {

struct UndirectedGap {
  double lambda2;
  Eigen::VectorXd fiedler;
};

UndirectedGap undirected_gap(const WeightedDigraph& g) {
  if (g.directed()) {
    throw Error(ErrorKind::kNotUndirected, "graph has an arc without an equal-weight reverse arc");
  }
  const GapInfo gap = spectral_gap(laplacian(g));
  if (!gap.is_simple) {
    throw Error(ErrorKind::kGapNotSimple,
                "lambda2 = " + std::to_string(gap.lambda2.real()) + " is repeated");
  }
  return {gap.lambda2.real(), *gap.fiedler};
}

void check_nodes(const WeightedDigraph& g, NodeId k, NodeId l) {
  if (k < 0 || l < 0 || k >= g.size() || l >= g.size()) {
    throw Error(ErrorKind::kIndexOutOfRange,
                "node index outside 0.." + std::to_string(g.size() - 1));
  }
  if (k == l) throw Error(ErrorKind::kInvalidArgument, "link endpoints must differ");
}

}  // namespace

LinkSlopes link_slopes_from_fiedler(const Eigen::VectorXd& v, NodeId k, NodeId l) {
  LinkSlopes s;
  s.k = k;
  s.l = l;
  const double diff = v(k) - v(l);
  s.s_undirected = diff * diff;
  s.s_forward = -v(l) * diff;
  s.s_backward = v(k) * diff;
  return s;
}

LinkSlopes link_slopes(const WeightedDigraph& g, NodeId k, NodeId l) {
  check_nodes(g, k, l);
  return link_slopes_from_fiedler(undirected_gap(g).fiedler, k, l);
}

std::vector<std::vector<NodeId>> destabilization_cascade(const Eigen::VectorXd& v) {
  std::vector<double> negatives;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) < -kZeroEntryTol) negatives.push_back(v(i));
  }
  if (negatives.empty()) return {};
  std::sort(negatives.begin(), negatives.end(), std::greater<>());

  // Lowest value of each run of equal (within tolerance) entries.
  std::vector<double> levels{negatives.front()};
  for (double x : negatives) {
    if (levels.back() - x > kZeroEntryTol) {
      levels.push_back(x);
    } else {
      levels.back() = x;
    }
  }
  double eps = 0.5 * std::abs(levels.front());
  if (levels.size() > 1) {
    eps = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < levels.size(); ++i) {
      eps = std::min(eps, 0.5 * (levels[i - 1] - levels[i]));
    }
  }

  std::vector<std::vector<NodeId>> chain;
  for (double level : levels) {
    std::vector<NodeId> members;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (v(i) >= level - eps) members.push_back(i);
    }
    chain.push_back(std::move(members));
  }
  return chain;
}

FiedlerPartition fiedler_partition(const WeightedDigraph& g) {
  const UndirectedGap gap = undirected_gap(g);
  FiedlerPartition p;
  p.fiedler = gap.fiedler;
  p.lambda2 = gap.lambda2;
  for (Eigen::Index i = 0; i < p.fiedler.size(); ++i) {
    const double x = p.fiedler(i);
    if (std::abs(x) <= kZeroEntryTol) p.zero_entries.push_back(i);
    if (x >= -kZeroEntryTol) {
      p.g1.push_back(i);
    } else {
      p.g2.push_back(i);
    }
  }
  p.degraded_genericity = !p.zero_entries.empty();
  p.cascade1 = destabilization_cascade(p.fiedler);
  p.cascade2 = destabilization_cascade(-p.fiedler);
  return p;
}

std::string_view to_string(Effect e) {
  switch (e) {
    case Effect::kImproves: return "improves";
    case Effect::kHinders: return "hinders";
    case Effect::kNeutral: return "first_order_neutral";
  }
  return "first_order_neutral";
}

Effect classify_slope(double slope) {
  if (slope > kNeutralSlopeTol) return Effect::kImproves;
  if (slope < -kNeutralSlopeTol) return Effect::kHinders;
  return Effect::kNeutral;
}

LinkTable classify_all_links(const WeightedDigraph& g, unsigned threads) {
  const UndirectedGap gap = undirected_gap(g);
  const NodeId n = g.size();
  LinkTable table;
  table.fiedler = gap.fiedler;
  table.lambda2 = gap.lambda2;
  table.records.resize(static_cast<std::size_t>(n * (n - 1)));

  auto fill_row = [&](NodeId k) {
    std::size_t slot = static_cast<std::size_t>(k * (n - 1));
    for (NodeId l = 0; l < n; ++l) {
      if (l == k) continue;
      LinkRecord& r = table.records[slot++];
      r.slopes = link_slopes_from_fiedler(gap.fiedler, k, l);
      r.effect = classify_slope(r.slopes.s_forward);
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  if (threads <= 1) {
    for (NodeId k = 0; k < n; ++k) fill_row(k);
    return table;
  }
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&, t] {
      for (NodeId k = t; k < n; k += threads) fill_row(k);
    });
  }
  pool.clear();
  return table;
}

std::vector<TwinPair> twin_node_pairs(const WeightedDigraph& g) {
  if (g.directed()) {
    throw Error(ErrorKind::kNotUndirected, "graph has an arc without an equal-weight reverse arc");
  }
  const NodeId n = g.size();
  const Eigen::MatrixXd w = g.adjacency();
  const Eigen::VectorXd degree = w.rowwise().sum();
  const double d_min = n > 0 ? degree.minCoeff() : 0.0;
  const double bound = n > 1 ? d_min * static_cast<double>(n) / static_cast<double>(n - 1) : 0.0;
  constexpr double kRowTol = 1e-12;

  std::vector<TwinPair> out;
  for (NodeId k = 0; k < n; ++k) {
    for (NodeId l = k + 1; l < n; ++l) {
      bool same = true;
      for (NodeId i = 0; i < n && same; ++i) {
        if (i == k || i == l) continue;
        same = std::abs(w(k, i) - w(l, i)) <= kRowTol;
      }
      if (!same) continue;
      const bool neutral = degree(k) + w(k, l) > bound * (1.0 + 1e-12);
      out.push_back({k, l, neutral});
    }
  }
  return out;
}

}  // namespace netsync
