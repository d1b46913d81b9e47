#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "netsync/directed.hpp"
#include "netsync/dynamics.hpp"
#include "netsync/edge_list.hpp"
#include "netsync/error.hpp"
#include "netsync/sim_config.hpp"
#include "netsync/spectral.hpp"
#include "netsync/undirected.hpp"
#include "report.hpp"

namespace netsync::cli {
namespace {

constexpr double kSyncThreshold = 1e-6;
constexpr double kSyncTail = 0.1;
// Samples below this are round-off, not decay, and are left out of the fit.
constexpr double kFitFloor = 1e-12;
constexpr double kOracleTol = 1e-4;

Effect effect_of(double slope, double tol) {
  if (slope > tol) return Effect::kImproves;
  if (slope < -tol) return Effect::kHinders;
  return Effect::kNeutral;
}

std::string_view effect_name(double slope, double tol) { return to_string(effect_of(slope, tol)); }

Json opt_num(const std::optional<double>& x) { return x ? num(*x) : Json(nullptr); }

Json certificate(const CutsetBlocks& b, const PerturbationReport& r, double tol) {
  Json arcs = Json::array();
  for (Eigen::Index i = 0; i < r.delta.rows(); ++i) {
    for (Eigen::Index j = 0; j < r.delta.cols(); ++j) {
      if (r.delta(i, j) <= 0.0) continue;
      const bool fwd = r.direction == Direction::kForward;
      const NodeId src = fwd ? b.master_nodes[j] : b.slave_nodes[j];
      const NodeId dst = fwd ? b.slave_nodes[i] : b.master_nodes[i];
      arcs.push_back({{"src", src + 1}, {"dst", dst + 1}, {"weight", num(r.delta(i, j))}});
    }
  }
  return Json{{"direction", to_string(r.direction)},
              {"construction", r.construction},
              {"arcs", arcs},
              {"slope", num(r.slope)},
              {"fd_slope", opt_num(r.fd_slope)},
              {"effect", effect_name(r.slope, tol)},
              {"notes", r.notes}};
}

Json arc_rows(const std::vector<ArcSlope>& arcs, double tol) {
  Json rows = Json::array();
  for (const ArcSlope& a : arcs) {
    rows.push_back({{"src", a.src + 1},
                    {"dst", a.dst + 1},
                    {"slope", num(a.slope)},
                    {"fd_slope", opt_num(a.fd_slope)},
                    {"effect", effect_name(a.slope, tol)}});
  }
  return rows;
}

std::string location_of(const WeightedDigraph& g, const CondensationReport& cond, Json& warnings) {
  if (!g.directed() || cond.components.size() == 1) return std::string(to_string(GapLocation::kWhole));
  if (cond.components.size() != 2) {
    warnings.push_back("gap location is reported for one or two strong components only");
    return {};
  }
  try {
    return std::string(to_string(gap_location(cutset_blocks(g)).location));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kAmbiguousLocation && e.kind() != ErrorKind::kGapNotSimple) throw;
    warnings.push_back(e.what());
    return {};
  }
}

void require_spanning_tree(const CondensationReport& cond) {
  if (!cond.has_spanning_tree) {
    throw Error(ErrorKind::kNotConnected, std::to_string(cond.root_components.size()) +
                                              " root components, no spanning diverging tree");
  }
}

int classify_undirected(const WeightedDigraph& g, bool with_fd, const Options& opts, std::ostream& out) {
  const double tol = opts.tol.value_or(kNeutralSlopeTol);
  const FiedlerPartition p = fiedler_partition(g);
  const LinkTable table = classify_all_links(g, opts.threads);
  const LaplacianMatrix l = laplacian(g);

  if (opts.format == "csv") {
    std::ostringstream csv;
    csv << "k,l,s_undirected,s_forward,s_backward,effect\n";
    for (const LinkRecord& r : table.records) {
      csv << r.slopes.k + 1 << ',' << r.slopes.l + 1 << ',' << csv_num(r.slopes.s_undirected) << ','
          << csv_num(r.slopes.s_forward) << ',' << csv_num(r.slopes.s_backward) << ','
          << effect_name(r.slopes.s_forward, tol) << '\n';
    }
    emit(csv.str(), opts.output, out);
    return kExitOk;
  }

  Json links = Json::array();
  for (const LinkRecord& r : table.records) {
    Json row{{"k", r.slopes.k + 1},
             {"l", r.slopes.l + 1},
             {"s_undirected", num(r.slopes.s_undirected)},
             {"s_forward", num(r.slopes.s_forward)},
             {"s_backward", num(r.slopes.s_backward)},
             {"effect", effect_name(r.slopes.s_forward, tol)},
             {"undirected_effect", effect_name(r.slopes.s_undirected, tol)}};
    if (with_fd) {
      try {
        row["fd_forward"] = num(fd_gap_slope(l, link_perturbation(g.size(), r.slopes.k, r.slopes.l)));
      } catch (const Error&) {
        row["fd_forward"] = nullptr;
      }
    }
    links.push_back(std::move(row));
  }
  Json cascade1 = Json::array(), cascade2 = Json::array();
  for (const auto& s : p.cascade1) cascade1.push_back(node_ids(s));
  for (const auto& s : p.cascade2) cascade2.push_back(node_ids(s));
  Json twins = Json::array();
  for (const TwinPair& t : twin_node_pairs(g)) {
    twins.push_back({{"k", t.k + 1}, {"l", t.l + 1}, {"predicted_neutral", t.predicted_neutral}});
  }
  Json warnings = Json::array();
  if (p.degraded_genericity) {
    warnings.push_back("non-generic weights: zero Fiedler entries at nodes " +
                       node_ids(p.zero_entries).dump() + " were placed in g1");
  }
  const Json report{{"command", "classify"},
                    {"mode", "undirected"},
                    {"lambda2", num(p.lambda2)},
                    {"fiedler", nums(p.fiedler)},
                    {"partition", {{"g1", node_ids(p.g1)}, {"g2", node_ids(p.g2)}}},
                    {"cascades", {{"from_g1", cascade1}, {"from_g2", cascade2}}},
                    {"links", links},
                    {"twins", twins},
                    {"warnings", warnings}};
  emit(dump(report), opts.output, out);
  return kExitOk;
}

int classify_directed(const WeightedDigraph& g, bool with_fd, const Options& opts, std::ostream& out) {
  const double tol = opts.tol.value_or(kNeutralSlopeTol);
  const CondensationReport cond = condensation(g);
  if (cond.components.size() == 1) {
    throw Error(ErrorKind::kNotTwoComponents,
                "the digraph is strongly connected; sign rules for perturbing strongly connected "
                "digraphs are an open problem (see README, open problems). "
                "'netsync oracle' still measures slopes numerically");
  }
  const CutsetBlocks b = cutset_blocks(g);
  const ArcSlopeTable table = single_arc_slopes(b, with_fd, opts.threads);

  if (opts.format == "csv") {
    std::ostringstream csv;
    csv << "direction,src,dst,slope,fd_slope,effect\n";
    for (const auto* list : {&table.forward, &table.backward}) {
      for (const ArcSlope& a : *list) {
        csv << to_string(a.direction) << ',' << a.src + 1 << ',' << a.dst + 1 << ','
            << csv_num(a.slope) << ',' << (a.fd_slope ? csv_num(*a.fd_slope) : "") << ','
            << effect_name(a.slope, tol) << '\n';
      }
    }
    emit(csv.str(), opts.output, out);
    return kExitOk;
  }

  const SlaveEig slave = slave_min_eig(b);
  Json warnings = Json::array();
  Json improving = nullptr, improving_cert = nullptr, hindering = nullptr;
  if (table.gap.location == GapLocation::kSlave) {
    try {
      const ImprovingNodes nodes = single_link_improving_nodes(b);
      std::vector<NodeId> ids;
      for (NodeId k : nodes.nodes) ids.push_back(b.master_nodes[k]);
      improving = {{"nodes", node_ids(ids)},
                   {"beta1", nums(nodes.beta1)},
                   {"delta_threshold", num(nodes.delta_threshold)},
                   {"threshold_unbounded", std::isinf(nodes.delta_threshold)}};
      if (nodes.zero_column_sums) warnings.push_back("master Laplacian has zero column sums");
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNotDiagonalizable) throw;
      warnings.push_back(e.what());
    }
    Eigen::Index best = 0;
    slave.y.maxCoeff(&best);
    improving_cert = certificate(b, improving_delta(b, best), tol);
    try {
      if (auto h = hindering_delta(b)) hindering = certificate(b, *h, tol);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kNotDiagonalizable) throw;
      warnings.push_back(e.what());
    }
  } else {
    warnings.push_back("gap is a master eigenvalue: forward arcs are first-order neutral and "
                       "backward slopes are not covered");
  }
  const Json report{
      {"command", "classify"},
      {"mode", "master_slave"},
      {"master_nodes", node_ids(b.master_nodes)},
      {"slave_nodes", node_ids(b.slave_nodes)},
      {"lambda2", num(table.gap.lambda2)},
      {"simple", table.gap.is_simple},
      {"location", to_string(table.gap.location)},
      {"slave", {{"mu", num(slave.mu)}, {"w", nums(slave.w)}, {"y", nums(slave.y)}}},
      {"forward", arc_rows(table.forward, tol)},
      {"backward", arc_rows(table.backward, tol)},
      {"improving_nodes", improving},
      {"improving_certificate", improving_cert},
      {"hindering_certificate", hindering},
      {"warnings", warnings}};
  emit(dump(report), opts.output, out);
  return kExitOk;
}

struct Segment {
  double from;
  double to;
};

double max_in(const Trajectory& t, Segment s) {
  double worst = 0.0;
  for (std::size_t i = 0; i < t.times.size(); ++i) {
    if (t.times[i] > s.from + 1e-12 && t.times[i] <= s.to + 1e-12) worst = std::max(worst, t.sync_error[i]);
  }
  return worst;
}

// Block-local position of an original node, or -1.
NodeId position(const std::vector<NodeId>& nodes, NodeId v) {
  auto it = std::find(nodes.begin(), nodes.end(), v);
  return it == nodes.end() ? -1 : static_cast<NodeId>(it - nodes.begin());
}

}  // namespace

int cmd_analyze(const std::string& graph_path, const Options& opts, std::ostream& out) {
  const WeightedDigraph g = read_edge_list(graph_path);
  const CondensationReport cond = condensation(g);
  require_spanning_tree(cond);
  const LaplacianMatrix l = laplacian(g);
  const Spectrum spectrum = full_spectrum(l);
  const GapInfo gap = spectral_gap(l);

  if (opts.format == "csv") {
    std::ostringstream csv;
    csv << "index,re,im\n";
    for (Eigen::Index i = 0; i < spectrum.size(); ++i) {
      csv << i + 1 << ',' << csv_num(spectrum.eigenvalues(i).real()) << ','
          << csv_num(spectrum.eigenvalues(i).imag()) << '\n';
    }
    emit(csv.str(), opts.output, out);
    return kExitOk;
  }

  Json warnings = Json::array();
  if (!gap.is_simple) warnings.push_back("lambda2 is not simple");
  const std::string location = location_of(g, cond, warnings);
  std::ostringstream echo;
  write_edge_list(echo, g);
  Json spec{{"eigenvalues", nums(spectrum.eigenvalues)},
            {"lambda2", num(gap.lambda2)},
            {"simple", gap.is_simple},
            {"location", location.empty() ? Json(nullptr) : Json(location)}};
  if (gap.fiedler) {
    spec["fiedler"] = nums(*gap.fiedler);
    std::vector<NodeId> zeros;
    for (Eigen::Index i = 0; i < gap.fiedler->size(); ++i) {
      if (std::abs((*gap.fiedler)(i)) <= kZeroEntryTol) zeros.push_back(i);
    }
    if (gap.is_simple && !zeros.empty()) {
      warnings.push_back("non-generic weights: zero Fiedler entries at nodes " + node_ids(zeros).dump());
    }
  }
  const Json report{{"command", "analyze"},
                    {"graph",
                     {{"nodes", g.size()},
                      {"edges", g.edge_count()},
                      {"directed", g.directed()},
                      {"strong_components", cond.components.size()},
                      {"spanning_tree", cond.has_spanning_tree},
                      {"echo", echo.str()}}},
                    {"spectrum", spec},
                    {"warnings", warnings}};
  emit(dump(report), opts.output, out);
  return kExitOk;
}

int cmd_classify(const std::string& graph_path, bool with_fd, const Options& opts, std::ostream& out) {
  const WeightedDigraph g = read_edge_list(graph_path);
  return g.directed() ? classify_directed(g, with_fd, opts, out)
                      : classify_undirected(g, with_fd, opts, out);
}

int cmd_simulate(const std::string& config_path, const Options& opts, std::ostream& out) {
  SimSpec spec = read_sim_config(config_path);
  if (opts.seed) spec.config.seed = *opts.seed;
  const Trajectory traj = integrate(spec.config, initial_state(spec));

  const bool csv_to_stdout = opts.format == "csv" && opts.output.empty();
  if (opts.format == "csv" || !opts.output.empty()) {
    std::ostringstream csv;
    write_trajectory_csv(csv, traj);
    emit(csv.str(), opts.output, out);
  }
  if (csv_to_stdout) return kExitOk;

  std::vector<Segment> segments;
  double from = traj.times.front();
  for (const LinkEvent& e : traj.events_applied) {
    if (e.time > from) segments.push_back({from, e.time});
    from = std::max(from, e.time);
  }
  segments.push_back({from, traj.final_time});

  Json seg_rows = Json::array();
  bool synchronized = false;
  for (const Segment& s : segments) {
    synchronized = is_synchronized(traj, s.from, s.to, kSyncThreshold, kSyncTail);
    seg_rows.push_back({{"from", num(s.from)},
                        {"to", num(s.to)},
                        {"synchronized", synchronized},
                        {"max_sync_error", num(max_in(traj, s))}});
  }

  double fit_to = segments.front().to;
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    if (traj.times[i] > fit_to) break;
    if (traj.sync_error[i] < kFitFloor) {
      fit_to = traj.times[i];
      break;
    }
  }
  const SyncSeries series = sync_error_series(traj, segments.front().from, fit_to);

  Json events = Json::array();
  for (const LinkEvent& e : traj.events_applied) {
    events.push_back({{"time", num(e.time)}, {"src", e.src + 1}, {"dst", e.dst + 1}, {"weight", num(e.weight)}});
  }
  const Json verdict{{"command", "simulate"},
                     {"config", config_path},
                     {"graph", spec.graph_path.string()},
                     {"alpha", num(spec.config.alpha)},
                     {"seed", spec.config.seed},
                     {"synchronized", synchronized},
                     {"final_sync_error", num(traj.sync_error.back())},
                     {"decay_rate", opt_num(series.decay_rate)},
                     {"fit_window", {num(segments.front().from), num(fit_to)}},
                     {"segments", seg_rows},
                     {"events_applied", events},
                     {"trajectory_csv", opts.output.empty() ? Json(nullptr) : Json(opts.output)}};
  out << dump(verdict);
  return kExitOk;
}

int cmd_oracle(const std::string& graph_path, const OracleArgs& args, const Options& opts,
               std::ostream& out) {
  const WeightedDigraph g = read_edge_list(graph_path);
  require_spanning_tree(condensation(g));
  const NodeId n = g.size();
  const LaplacianMatrix l = laplacian(g);
  const GapInfo gap = spectral_gap(l);
  if (!gap.is_simple) throw Error(ErrorKind::kGapNotSimple, "lambda2 is repeated");
  const double tol = opts.tol.value_or(kOracleTol);
  if (!(args.weight > 0.0) || !(args.eps >= 1e-9 && args.eps <= 1e-3)) {
    throw Error(ErrorKind::kInvalidArgument, "need weight > 0 and eps in [1e-9, 1e-3]");
  }

  std::optional<CutsetBlocks> blocks;
  if (g.directed() && condensation(g).components.size() == 2) blocks = cutset_blocks(g);

  // Closed-form slope from the module that covers this perturbation, if any.
  auto formula = [&](NodeId u, NodeId v) -> std::optional<double> {
    if (!g.directed() && gap.fiedler) {
      const LinkSlopes s = link_slopes_from_fiedler(*gap.fiedler, u, v);
      return args.weight * (args.undirected ? s.s_undirected : s.s_forward);
    }
    if (!blocks || args.undirected) return std::nullopt;
    const NodeId mu = position(blocks->master_nodes, u), mv = position(blocks->master_nodes, v);
    const NodeId su = position(blocks->slave_nodes, u), sv = position(blocks->slave_nodes, v);
    try {
      if (mu >= 0 && sv >= 0) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(blocks->slave_size(), blocks->master_size());
        d(sv, mu) = args.weight;
        return forward_slope(*blocks, d).slope;
      }
      if (su >= 0 && mv >= 0) {
        Eigen::MatrixXd d = Eigen::MatrixXd::Zero(blocks->master_size(), blocks->slave_size());
        d(mv, su) = args.weight;
        return backward_slope(*blocks, d).slope;
      }
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kGapInMaster && e.kind() != ErrorKind::kSingularShift) throw;
    }
    return std::nullopt;
  };

  bool all_agree = true;
  double worst = 0.0;
  auto check = [&](NodeId u, NodeId v) {
    Eigen::MatrixXd p = args.undirected ? undirected_link_perturbation(n, u, v) : link_perturbation(n, u, v);
    p *= args.weight;
    const double slope = gap_slope(l.matrix(), p).real();
    Json row{{"src", u + 1}, {"dst", v + 1}, {"slope", num(slope)}};
    const std::optional<double> closed = formula(u, v);
    row["formula_slope"] = opt_num(closed);
    try {
      const double fd = fd_gap_slope(l.matrix(), p, args.eps);
      const double scale = std::max(1.0, std::abs(slope));
      double diff = std::abs(fd - slope) / scale;
      if (closed) diff = std::max(diff, std::abs(*closed - slope) / scale);
      worst = std::max(worst, diff);
      const bool agree = diff <= tol;
      all_agree = all_agree && agree;
      row["fd_slope"] = num(fd);
      row["relative_diff"] = num(diff);
      row["agree"] = agree;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kEigenvalueCollision) throw;
      row["fd_slope"] = nullptr;
      row["skipped"] = e.what();
    }
    return row;
  };

  Json rows = Json::array();
  if (!args.arc.empty()) {
    if (args.arc.size() != 2 || args.arc[0] < 1 || args.arc[1] < 1 || args.arc[0] > n || args.arc[1] > n) {
      throw Error(ErrorKind::kIndexOutOfRange, "--arc needs two node ids in 1.." + std::to_string(n));
    }
    if (args.arc[0] == args.arc[1]) throw Error(ErrorKind::kSelfLoop, "--arc endpoints coincide");
    rows.push_back(check(args.arc[0] - 1, args.arc[1] - 1));
  } else {
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = args.undirected ? u + 1 : 0; v < n; ++v) {
        if (u != v) rows.push_back(check(u, v));
      }
    }
  }
  const Json report{{"command", "oracle"},
                    {"lambda2", num(gap.lambda2)},
                    {"perturbation", args.undirected ? "undirected_link" : "arc"},
                    {"weight", num(args.weight)},
                    {"eps", num(args.eps)},
                    {"tolerance", num(tol)},
                    {"checks", rows},
                    {"max_relative_diff", num(worst)},
                    {"all_agree", all_agree}};
  emit(dump(report), opts.output, out);
  return all_agree ? kExitOk : kExitNumerical;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral-gap sensitivity and synchronization of coupled networks", "netsync"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Options opts;
  std::uint64_t seed = 0;
  double tol = 0.0;
  auto* seed_opt = app.add_option("--seed", seed, "seed for initial-condition jitter (overrides the config)");
  app.add_option("--threads", opts.threads, "worker threads for link sweeps, 0 for all cores");
  auto* tol_opt = app.add_option("--tol", tol, "neutral-slope tolerance (classify) or agreement tolerance (oracle)");
  app.add_option("-o,--output", opts.output, "write the report (simulate: trajectory CSV) to this path");
  app.add_option("--format", opts.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  std::string path;
  bool with_fd = false;
  OracleArgs oracle;

  auto* analyze = app.add_subcommand("analyze", "connectivity, spectrum and gap location of an edge list");
  analyze->add_option("graph", path, "edge-list file")->required();
  auto* classify = app.add_subcommand("classify", "gap-slope sign of every single link or arc");
  classify->add_option("graph", path, "edge-list file")->required();
  classify->add_flag("--fd", with_fd, "add finite-difference slopes");
  auto* simulate = app.add_subcommand("simulate", "integrate coupled Rossler oscillators from a config file");
  simulate->add_option("config", path, "simulation config file")->required();
  auto* check = app.add_subcommand("oracle", "compare analytic gap slopes with finite differences");
  check->add_option("graph", path, "edge-list file")->required();
  check->add_option("--arc", oracle.arc, "single arc 'u v' (1-based); default sweeps all arcs")->expected(2);
  check->add_option("--weight", oracle.weight, "perturbation weight");
  check->add_flag("--undirected", oracle.undirected, "perturb the undirected link u-v");
  check->add_option("--eps", oracle.eps, "finite-difference step");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitOk : kExitPrecondition;
  }
  if (*seed_opt) opts.seed = seed;
  if (*tol_opt) opts.tol = tol;

  try {
    if (*analyze) return cmd_analyze(path, opts, out);
    if (*classify) return cmd_classify(path, with_fd, opts, out);
    if (*simulate) return cmd_simulate(path, opts, out);
    return cmd_oracle(path, oracle, opts, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_numerical(e.kind()) ? kExitNumerical : kExitPrecondition;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitPrecondition;
  }
}

}  // namespace netsync::cli
