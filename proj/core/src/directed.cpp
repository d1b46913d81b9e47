#include "netsync/directed.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <sstream>
#include <thread>

#include <Eigen/LU>
#include <Eigen/SVD>

#include "netsync/error.hpp"

namespace netsync {
namespace {

constexpr double kDiagonalizableCond = 1e8;
constexpr double kLocationRelTol = 1e-8;
constexpr double kDeltaTol = 1e-12;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(12);
  os << x;
  return os.str();
}

bool strongly_connected(const Eigen::MatrixXd& lap) {
  const Eigen::Index n = lap.rows();
  if (n <= 1) return true;
  auto sweep = [&](bool forward) {
    std::vector<char> seen(n, 0);
    std::vector<Eigen::Index> todo{0};
    seen[0] = 1;
    Eigen::Index count = 1;
    while (!todo.empty()) {
      const Eigen::Index v = todo.back();
      todo.pop_back();
      for (Eigen::Index u = 0; u < n; ++u) {
        // lap(i, j) < 0 encodes an arc j -> i.
        const double entry = forward ? lap(u, v) : lap(v, u);
        if (u != v && entry < 0.0 && !seen[u]) {
          seen[u] = 1;
          ++count;
          todo.push_back(u);
        }
      }
    }
    return count == n;
  };
  return sweep(true) && sweep(false);
}

void check_delta(const Eigen::MatrixXd& delta, Eigen::Index rows, Eigen::Index cols) {
  if (delta.rows() != rows || delta.cols() != cols) {
    throw Error(ErrorKind::kInvalidArgument,
                "delta must be " + std::to_string(rows) + "x" + std::to_string(cols));
  }
  if (!delta.allFinite() || (delta.array() < 0.0).any()) {
    throw Error(ErrorKind::kInvalidArgument, "delta must be finite and nonnegative");
  }
  if (delta.maxCoeff() <= kDeltaTol) {
    throw Error(ErrorKind::kInvalidArgument, "delta has no entry above " + fmt(kDeltaTol));
  }
}

struct Context {
  GapInfo gap;
  Eigen::MatrixXd assembled;
  std::optional<SlaveEig> slave;
};

Context make_context(const CutsetBlocks& blocks) {
  Context ctx;
  ctx.gap = gap_location(blocks);
  ctx.assembled = blocks.assemble();
  if (ctx.gap.location == GapLocation::kSlave) ctx.slave = slave_min_eig(blocks);
  return ctx;
}

void attach_fd(PerturbationReport& r, const Context& ctx, const CutsetBlocks& blocks) {
  try {
    r.fd_slope = fd_gap_slope(ctx.assembled, perturbation_matrix(blocks, r.delta, r.direction));
  } catch (const Error& e) {
    r.notes.push_back(std::string("finite-difference check skipped: ") + e.what());
  }
}

PerturbationReport forward_impl(const Context& ctx, const CutsetBlocks& blocks,
                                const Eigen::MatrixXd& delta, bool with_fd) {
  check_delta(delta, blocks.slave_size(), blocks.master_size());
  PerturbationReport r;
  r.delta = delta;
  r.direction = Direction::kForward;
  if (ctx.gap.location == GapLocation::kMaster) {
    r.slope = 0.0;
    r.classification = Effect::kNeutral;
    r.construction = "forward: gap is an eigenvalue of the master block, unaffected by the cutset";
  } else {
    const SlaveEig& se = *ctx.slave;
    const Eigen::VectorXd d_delta = delta.rowwise().sum();
    r.slope = se.w.dot(d_delta.cwiseProduct(se.y)) / se.w.dot(se.y);
    r.classification = classify_slope(r.slope);
    r.construction = "forward: w^T D_delta y / w^T y";
  }
  if (with_fd) attach_fd(r, ctx, blocks);
  return r;
}

PerturbationReport backward_impl(const Context& ctx, const CutsetBlocks& blocks,
                                 const Eigen::MatrixXd& delta, bool with_fd) {
  check_delta(delta, blocks.master_size(), blocks.slave_size());
  if (ctx.gap.location != GapLocation::kSlave) {
    throw Error(ErrorKind::kGapInMaster,
                "backward slopes need lambda2 outside sigma(l1); the master-located case is "
                "not covered by the cutset analysis");
  }
  const SlaveEig& se = *ctx.slave;
  const double lambda2 = ctx.gap.lambda2.real();
  const Eigen::Index n1 = blocks.master_size();
  const Eigen::MatrixXd shifted = blocks.l1 - lambda2 * Eigen::MatrixXd::Identity(n1, n1);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);
  if (!(lu.rcond() > 1e-13)) {
    throw Error(ErrorKind::kSingularShift, "l1 - lambda2 I is numerically singular");
  }
  const Eigen::VectorXd x = lu.solve(delta * se.y);
  PerturbationReport r;
  r.delta = delta;
  r.direction = Direction::kBackward;
  r.slope = -se.w.dot(blocks.c * x) / se.w.dot(se.y);
  r.classification = classify_slope(r.slope);
  r.construction = "backward: -w^T C (l1 - lambda2 I)^{-1} delta y / w^T y";
  if (with_fd) attach_fd(r, ctx, blocks);
  return r;
}

// Lowest-index entry of maximal value within a relative tie tolerance.
std::vector<Eigen::Index> argmax_set(const Eigen::VectorXd& v) {
  const double top = v.maxCoeff();
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) >= top - 1e-9 * std::max(1.0, std::abs(top))) out.push_back(i);
  }
  return out;
}

}  // namespace

std::string_view to_string(Direction d) {
  return d == Direction::kForward ? "forward" : "backward";
}

SlaveEig slave_min_eig(const CutsetBlocks& blocks) {
  if (blocks.slave_size() == 0 || !(blocks.d_c.array() > 0.0).any()) {
    throw Error(ErrorKind::kInvalidArgument, "slave block has no incoming cutset");
  }
  if (!strongly_connected(blocks.l2)) {
    throw Error(ErrorKind::kNotIrreducible, "slave component is not strongly connected");
  }
  const Eigen::MatrixXd a = blocks.slave_operator();
  const Eigen::Index n2 = a.rows();

  double s = 0.0;
  for (Eigen::Index i = 0; i < n2; ++i) {
    double mass = a(i, i);
    for (Eigen::Index j = 0; j < n2; ++j)
      if (j != i) mass += std::abs(a(i, j));
    s = std::max(s, mass);
  }
  const Eigen::MatrixXd shifted = s * Eigen::MatrixXd::Identity(n2, n2) - a;

  const Eigen::VectorXcd vals = sorted_eigenvalues(shifted);
  const double perron = vals(n2 - 1).real();
  const EigenPair pair = eig_pair(shifted, Complex(perron, 0.0));

  Eigen::VectorXd y = pair.right.real();
  Eigen::VectorXd w = pair.left.real();
  if (y.sum() < 0) y = -y;
  if (w.sum() < 0) w = -w;
  if (!(y.minCoeff() > 0.0) || !(w.minCoeff() > 0.0)) {
    throw Error(ErrorKind::kConvergenceFailure, "Perron eigenvectors are not strictly positive");
  }
  y /= y.maxCoeff();
  w /= w.dot(y);

  SlaveEig out;
  out.shift = s;
  out.perron_root = perron;
  out.mu = s - perron;
  out.w = std::move(w);
  out.y = std::move(y);
  if (!(out.mu > 0.0)) {
    throw Error(ErrorKind::kConvergenceFailure, "slave minimal eigenvalue is not positive");
  }
  return out;
}

MasterEigenbasis master_eigenbasis(const CutsetBlocks& blocks) {
  const Eigen::Index n1 = blocks.master_size();
  const Spectrum s = full_spectrum(blocks.l1);
  MasterEigenbasis mb;
  mb.alphas = s.eigenvalues;
  mb.basis_vectors = s.right_vectors;
  mb.basis_vectors.col(0).setOnes();

  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(mb.basis_vectors);
  const auto& sv = svd.singularValues();
  mb.condition = sv(n1 - 1) > 0 ? sv(0) / sv(n1 - 1) : std::numeric_limits<double>::infinity();
  mb.diagonalizable = mb.condition <= kDiagonalizableCond;
  if (std::isfinite(mb.condition)) {
    mb.left_vectors = mb.basis_vectors.partialPivLu().inverse().transpose();
  } else {
    mb.left_vectors = s.left_vectors;
  }

  const double tol = 1e-12 * std::max(1.0, inf_norm(blocks.l1));
  mb.zero_column_sums = (blocks.l1.colwise().sum().array().abs() <= tol).all();
  return mb;
}

GapInfo gap_location(const CutsetBlocks& blocks) {
  GapInfo gap = spectral_gap(blocks.assemble());
  if (!gap.is_simple) throw Error(ErrorKind::kGapNotSimple, "lambda2 is repeated");

  auto distance = [&](const Eigen::MatrixXd& m) {
    double d = std::numeric_limits<double>::infinity();
    const Eigen::VectorXcd vals = sorted_eigenvalues(m);
    for (Eigen::Index i = 0; i < vals.size(); ++i) d = std::min(d, std::abs(vals(i) - gap.lambda2));
    return d;
  };
  const double d_master = distance(blocks.l1);
  const double d_slave = distance(blocks.slave_operator());
  const double tol = kLocationRelTol * std::max(1.0, std::abs(gap.lambda2));
  if (d_master <= tol && d_slave <= tol) {
    throw Error(ErrorKind::kAmbiguousLocation,
                "lambda2 = " + fmt(gap.lambda2.real()) + " lies in both block spectra");
  }
  gap.location = d_master < d_slave ? GapLocation::kMaster : GapLocation::kSlave;
  if (gap.location == GapLocation::kSlave) gap.lambda2 = Complex(gap.lambda2.real(), 0.0);
  return gap;
}

Eigen::MatrixXd perturbation_matrix(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta,
                                    Direction direction) {
  const Eigen::Index n1 = blocks.master_size(), n2 = blocks.slave_size();
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
  const Eigen::VectorXd rows = delta.rowwise().sum();
  if (direction == Direction::kForward) {
    p.bottomLeftCorner(n2, n1) = -delta;
    p.bottomRightCorner(n2, n2).diagonal() = rows;
  } else {
    p.topRightCorner(n1, n2) = -delta;
    p.topLeftCorner(n1, n1).diagonal() = rows;
  }
  return p;
}

PerturbationReport forward_slope(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta) {
  return forward_impl(make_context(blocks), blocks, delta, true);
}

PerturbationReport backward_slope(const CutsetBlocks& blocks, const Eigen::MatrixXd& delta) {
  return backward_impl(make_context(blocks), blocks, delta, true);
}

PerturbationReport improving_delta(const CutsetBlocks& blocks, NodeId k) {
  if (k < 0 || k >= blocks.slave_size()) {
    throw Error(ErrorKind::kIndexOutOfRange, "slave node index " + std::to_string(k));
  }
  const Context ctx = make_context(blocks);
  if (ctx.gap.location != GapLocation::kSlave) {
    throw Error(ErrorKind::kGapInMaster, "improving construction needs the gap in the slave");
  }
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(blocks.master_size(), blocks.slave_size());
  delta.col(k).setConstant(1.0 / ctx.slave->y(k));
  PerturbationReport r = backward_impl(ctx, blocks, delta, true);
  r.construction = "improving: every master node receives from slave node " +
                   std::to_string(blocks.slave_nodes[k] + 1) + " with weight 1/y_k (delta y = 1)";
  return r;
}

Eigen::VectorXd master_resolvent_column(const CutsetBlocks& blocks, double lambda, NodeId k) {
  const Eigen::Index n1 = blocks.master_size();
  const Eigen::MatrixXd shifted = blocks.l1 - lambda * Eigen::MatrixXd::Identity(n1, n1);
  return -shifted.partialPivLu().solve(Eigen::VectorXd::Unit(n1, k));
}

ImprovingNodes single_link_improving_nodes(const CutsetBlocks& blocks) {
  const GapInfo gap = gap_location(blocks);
  if (gap.location != GapLocation::kSlave) {
    throw Error(ErrorKind::kGapInMaster, "improving nodes need the gap in the slave");
  }
  const MasterEigenbasis mb = master_eigenbasis(blocks);
  if (!mb.diagonalizable) {
    throw Error(ErrorKind::kNotDiagonalizable,
                "master eigenvector matrix has condition " + fmt(mb.condition));
  }
  const Eigen::Index n1 = blocks.master_size();
  ImprovingNodes out;
  out.zero_column_sums = mb.zero_column_sums;
  if (mb.zero_column_sums) {
    out.beta1 = Eigen::VectorXd::Constant(n1, 1.0 / static_cast<double>(n1));
  } else {
    const Eigen::VectorXd u1 = mb.left_vectors.col(0).real();
    out.beta1 = u1 / u1.sum();
  }
  for (Eigen::Index k = 0; k < n1; ++k) {
    if (out.beta1(k) > 1e-10) out.nodes.push_back(k);
  }

  if (n1 == 1) {
    out.delta_threshold = std::numeric_limits<double>::infinity();
    return out;
  }
  auto positive = [&](double lambda) {
    for (NodeId k : out.nodes) {
      if (!(master_resolvent_column(blocks, lambda, k).minCoeff() > 0.0)) return false;
    }
    return true;
  };
  const double upper = mb.alphas(1).real();
  double lo = 0.0, hi = upper;
  for (int it = 0; it < 40; ++it) {
    const double mid = 0.5 * (lo + hi);
    (positive(mid) ? lo : hi) = mid;
  }
  // The bisection assumes positivity holds on an interval starting at 0;
  // shrink to the first failing grid point if it does not.
  constexpr int kGrid = 64;
  for (int pass = 0; pass < 8 && lo > 0.0; ++pass) {
    bool ok = true;
    for (int i = 1; i <= kGrid; ++i) {
      const double lambda = lo * i / kGrid;
      if (!positive(lambda)) {
        lo = lo * (i - 1) / kGrid;
        ok = false;
        break;
      }
    }
    if (ok) break;
  }
  out.delta_threshold = lo;
  return out;
}

Eigen::MatrixXd realize_delta(const Eigen::VectorXd& target, const Eigen::VectorXd& y,
                              bool sparse) {
  if ((target.array() < 0.0).any() || !(y.array() > 0.0).all()) {
    throw Error(ErrorKind::kInvalidArgument, "realization needs target >= 0 and y > 0");
  }
  if (!sparse) return target * y.transpose() / y.squaredNorm();
  Eigen::Index col = 0;
  const double top = y.maxCoeff();
  while (y(col) < top * (1.0 - 1e-12)) ++col;
  Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(target.size(), y.size());
  delta.col(col) = target / y(col);
  return delta;
}

std::optional<PerturbationReport> hindering_delta(const CutsetBlocks& blocks) {
  const Context ctx = make_context(blocks);
  if (ctx.gap.location != GapLocation::kSlave) {
    throw Error(ErrorKind::kGapInMaster, "hindering construction needs the gap in the slave");
  }
  const MasterEigenbasis mb = master_eigenbasis(blocks);
  if (!mb.diagonalizable) {
    throw Error(ErrorKind::kNotDiagonalizable,
                "master eigenvector matrix has condition " + fmt(mb.condition));
  }
  const double lambda2 = ctx.gap.lambda2.real();
  const Eigen::Index n1 = blocks.master_size();
  const Eigen::VectorXd loaded = blocks.c.colwise().sum().transpose();

  for (Eigen::Index k = 1; k < n1; ++k) {
    const Complex alpha = mb.alphas(k);
    if (std::abs(alpha.imag()) > 1e-10 * std::max(1.0, std::abs(alpha))) continue;
    if (!(alpha.real() > 0.0)) continue;
    const Eigen::VectorXcd xc = mb.basis_vectors.col(k);
    if (xc.imag().cwiseAbs().maxCoeff() > 1e-8 * xc.cwiseAbs().maxCoeff()) continue;
    Eigen::VectorXd xr = xc.real();
    xr /= xr.cwiseAbs().maxCoeff();

    for (double sign : {1.0, -1.0}) {
      const Eigen::VectorXd x = sign * xr;
      Eigen::VectorXd target;
      std::vector<std::string> notes;
      if (x.minCoeff() < -1e-12) {
        const double beta_m = -x.minCoeff();
        const double beta_big = x.maxCoeff();
        if (!(beta_big > 0.0)) continue;
        const double bound = (beta_big / beta_m + 1.0) * lambda2;
        if (!(alpha.real() < bound)) continue;
        bool hits_cutset = false;
        for (Eigen::Index i : argmax_set(x)) hits_cutset = hits_cutset || loaded(i) > 0.0;
        if (!hits_cutset) continue;
        target = (beta_m * Eigen::VectorXd::Ones(n1) + x).cwiseMax(0.0);
        notes.push_back("alpha_k = " + fmt(alpha.real()) + ", bound (beta_M/beta_m + 1) lambda2 = " +
                        fmt(bound));
        if ((bound - alpha.real()) < 1e-3 * bound) notes.push_back("borderline: alpha_k near bound");
      } else {
        if (!(alpha.real() > lambda2)) continue;
        target = x.cwiseMax(0.0);
        notes.push_back("alpha_k = " + fmt(alpha.real()) + " with a nonnegative eigenvector");
      }
      target = target.unaryExpr([](double t) { return t <= kDeltaTol ? 0.0 : t; });
      if (!(target.maxCoeff() > kDeltaTol)) continue;

      PerturbationReport r =
          backward_impl(ctx, blocks, realize_delta(target, ctx.slave->y, true), true);
      if (r.slope > 0.0) continue;
      if (r.fd_slope && *r.fd_slope > 1e-6) continue;
      if (std::abs(r.slope) < 1e-8) r.notes.push_back("borderline: slope near zero");
      for (auto& note : notes) r.notes.push_back(std::move(note));
      r.construction = "hindering: delta y = beta_m 1 + X_k for master eigenvalue alpha_" +
                       std::to_string(k + 1);
      return r;
    }
  }
  return std::nullopt;
}

ArcSlopeTable single_arc_slopes(const CutsetBlocks& blocks, bool with_fd, unsigned threads) {
  const Context ctx = make_context(blocks);
  const Eigen::Index n1 = blocks.master_size(), n2 = blocks.slave_size();
  ArcSlopeTable table;
  table.gap = ctx.gap;
  table.forward.resize(static_cast<std::size_t>(n1 * n2));
  const bool backward = ctx.gap.location == GapLocation::kSlave;
  if (backward) table.backward.resize(table.forward.size());

  auto work = [&](std::size_t idx) {
    const Eigen::Index m = static_cast<Eigen::Index>(idx) / n2;
    const Eigen::Index j = static_cast<Eigen::Index>(idx) % n2;
    Eigen::MatrixXd fwd = Eigen::MatrixXd::Zero(n2, n1);
    fwd(j, m) = 1.0;
    const PerturbationReport f = forward_impl(ctx, blocks, fwd, with_fd);
    table.forward[idx] = {blocks.master_nodes[m], blocks.slave_nodes[j], Direction::kForward,
                          f.slope, f.fd_slope, f.classification};
    if (backward) {
      Eigen::MatrixXd bwd = Eigen::MatrixXd::Zero(n1, n2);
      bwd(m, j) = 1.0;
      const PerturbationReport b = backward_impl(ctx, blocks, bwd, with_fd);
      table.backward[idx] = {blocks.slave_nodes[j], blocks.master_nodes[m], Direction::kBackward,
                             b.slope, b.fd_slope, b.classification};
    }
  };

  const std::size_t total = table.forward.size();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < total; ++i) work(i);
  } else {
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&, t] {
          try {
            for (std::size_t i = t; i < total; i += threads) work(i);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    for (auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  std::sort(table.forward.begin(), table.forward.end(), [](const ArcSlope& a, const ArcSlope& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  std::sort(table.backward.begin(), table.backward.end(), [](const ArcSlope& a, const ArcSlope& b) {
    return std::pair(a.src, a.dst) < std::pair(b.src, b.dst);
  });
  return table;
}

}  // namespace netsync
