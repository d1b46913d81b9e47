#include "netsync/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>
#include <Eigen/SVD>

#include "netsync/error.hpp"

namespace netsync {
namespace {

constexpr double kTieRelTol = 1e-9;
constexpr double kCondLimit = 1e6;

bool exactly_symmetric(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) return false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = i + 1; j < m.cols(); ++j)
      if (m(i, j) != m(j, i)) return false;
  return true;
}

void require_square(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw Error(ErrorKind::kInvalidArgument, "expected a nonempty square matrix, got " +
                                                 std::to_string(m.rows()) + "x" +
                                                 std::to_string(m.cols()));
  }
}

// Index of the largest-magnitude entry, preferring the lowest index among
// entries within a relative tie tolerance.
template <typename Vec>
Eigen::Index dominant_index(const Vec& v) {
  const double top = v.cwiseAbs().maxCoeff();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= top * (1.0 - kTieRelTol)) return i;
  }
  return 0;
}

void normalize_phase(Eigen::VectorXcd& v) {
  const double norm = v.norm();
  if (norm == 0.0) return;
  v /= norm;
  const Complex pivot = v(dominant_index(v));
  v *= std::conj(pivot) / std::abs(pivot);
}

// Stable order by real part; runs of (near-)equal real parts are ordered by
// imaginary part.
std::vector<Eigen::Index> sort_order(const Eigen::VectorXcd& vals, double tie_tol) {
  std::vector<Eigen::Index> order(vals.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return vals(a).real() < vals(b).real();
  });
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() &&
           vals(order[end]).real() - vals(order[start]).real() <= tie_tol) {
      ++end;
    }
    std::stable_sort(order.begin() + start, order.begin() + end,
                     [&](Eigen::Index a, Eigen::Index b) {
                       return vals(a).imag() < vals(b).imag();
                     });
    start = end;
  }
  return order;
}

std::vector<bool> simplicity_flags(const Eigen::VectorXcd& vals, double tol) {
  std::vector<bool> simple(vals.size(), true);
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    for (Eigen::Index j = i + 1; j < vals.size(); ++j)
      if (std::abs(vals(i) - vals(j)) <= tol) simple[i] = simple[j] = false;
  return simple;
}

Spectrum symmetric_spectrum(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kConvergenceFailure, "symmetric eigensolver did not converge");
  }
  Spectrum s;
  s.symmetric = true;
  s.eigenvalues = es.eigenvalues().cast<Complex>();
  Eigen::MatrixXd vecs = es.eigenvectors();
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) {
    Eigen::VectorXd col = vecs.col(j);
    normalize_sign(col);
    vecs.col(j) = col;
  }
  s.right_vectors = vecs.cast<Complex>();
  s.left_vectors = s.right_vectors;
  s.simple = simplicity_flags(s.eigenvalues, simplicity_tolerance(m));
  return s;
}

struct NullPair {
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;
};

// Left and right null vectors of (m - shift I) from the smallest singular
// triple.
NullPair null_pair(const Eigen::MatrixXd& m, Complex shift) {
  const Eigen::Index n = m.rows();
  NullPair out;
  if (shift.imag() == 0.0) {
    Eigen::MatrixXd a = m - shift.real() * Eigen::MatrixXd::Identity(n, n);
    Eigen::BDCSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.right = svd.matrixV().col(n - 1).cast<Complex>();
    out.left = svd.matrixU().col(n - 1).cast<Complex>();
  } else {
    Eigen::MatrixXcd a = m.cast<Complex>() - shift * Eigen::MatrixXcd::Identity(n, n);
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    out.right = svd.matrixV().col(n - 1);
    out.left = svd.matrixU().col(n - 1).conjugate();
  }
  return out;
}

Spectrum general_spectrum(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, true);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kConvergenceFailure, "nonsymmetric eigensolver did not converge");
  }
  const double scale = std::max(1.0, inf_norm(m));
  const Eigen::VectorXcd raw_vals = es.eigenvalues();
  const Eigen::MatrixXcd raw_vecs = es.eigenvectors();
  const auto order = sort_order(raw_vals, 1e-12 * scale);

  const Eigen::Index n = m.rows();
  Spectrum s;
  s.eigenvalues.resize(n);
  s.right_vectors.resize(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    s.eigenvalues(j) = raw_vals(order[j]);
    Eigen::VectorXcd v = raw_vecs.col(order[j]);
    normalize_phase(v);
    s.right_vectors.col(j) = v;
  }
  s.simple = simplicity_flags(s.eigenvalues, simplicity_tolerance(m));

  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(s.right_vectors);
  if (lu.rcond() > 1.0 / kCondLimit) {
    s.left_vectors = lu.inverse().transpose();
  } else {
    // Eigenvectors of m^T matched by eigenvalue, simple eigenvalues first.
    Eigen::EigenSolver<Eigen::MatrixXd> et(m.transpose(), true);
    if (et.info() != Eigen::Success) {
      throw Error(ErrorKind::kConvergenceFailure, "nonsymmetric eigensolver did not converge");
    }
    const Eigen::VectorXcd t_vals = et.eigenvalues();
    const Eigen::MatrixXcd t_vecs = et.eigenvectors();
    std::vector<bool> used(n, false);
    const double residual_tol = 1e-12 * scale;
    s.left_vectors.resize(n, n);
    for (bool simple_pass : {true, false}) {
      for (Eigen::Index j = 0; j < n; ++j) {
        if (s.simple[j] != simple_pass) continue;
        Eigen::Index best = -1;
        for (Eigen::Index i = 0; i < n; ++i) {
          if (!used[i] && (best < 0 || std::abs(t_vals(i) - s.eigenvalues(j)) <
                                           std::abs(t_vals(best) - s.eigenvalues(j)))) {
            best = i;
          }
        }
        used[best] = true;
        Eigen::VectorXcd u = t_vecs.col(best);
        const Complex lambda = s.eigenvalues(j);
        if ((m.transpose().cast<Complex>() * u - lambda * u).norm() > residual_tol * u.norm()) {
          u = null_pair(m, lambda).left;
        }
        const Complex dot = u.transpose() * s.right_vectors.col(j);
        if (std::abs(dot) > 1e-12) u /= dot;
        s.left_vectors.col(j) = u;
      }
    }
  }
  return s;
}

}  // namespace

double inf_norm(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().rowwise().sum().maxCoeff();
}

double simplicity_tolerance(const Eigen::MatrixXd& m) {
  return 1e-8 * std::max(1.0, inf_norm(m));
}

Spectrum full_spectrum(const Eigen::MatrixXd& m) {
  require_square(m);
  return exactly_symmetric(m) ? symmetric_spectrum(m) : general_spectrum(m);
}

Spectrum full_spectrum(const LaplacianMatrix& l) { return full_spectrum(l.matrix()); }

Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& m) {
  require_square(m);
  if (exactly_symmetric(m)) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) {
      throw Error(ErrorKind::kConvergenceFailure, "symmetric eigensolver did not converge");
    }
    return es.eigenvalues().cast<Complex>();
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::kConvergenceFailure, "nonsymmetric eigensolver did not converge");
  }
  const Eigen::VectorXcd raw = es.eigenvalues();
  const auto order = sort_order(raw, 1e-12 * std::max(1.0, inf_norm(m)));
  Eigen::VectorXcd out(raw.size());
  for (Eigen::Index j = 0; j < raw.size(); ++j) out(j) = raw(order[j]);
  return out;
}

std::string_view to_string(GapLocation location) {
  switch (location) {
    case GapLocation::kWhole: return "whole";
    case GapLocation::kMaster: return "master";
    case GapLocation::kSlave: return "slave";
  }
  return "whole";
}

GapInfo spectral_gap(const Eigen::MatrixXd& m) {
  require_square(m);
  if (m.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "spectral gap needs n >= 2");
  const bool symmetric = exactly_symmetric(m);
  std::optional<Spectrum> s;
  if (symmetric) s = symmetric_spectrum(m);
  const Eigen::VectorXcd vals = symmetric ? s->eigenvalues : sorted_eigenvalues(m);
  GapInfo gap;
  gap.lambda2 = vals(1);
  if (gap.lambda2.real() <= simplicity_tolerance(m)) {
    throw Error(ErrorKind::kNotConnected,
                "zero eigenvalue is not simple (Re lambda2 = " +
                    std::to_string(gap.lambda2.real()) + "); no spanning diverging tree");
  }
  gap.is_simple = simplicity_flags(vals, simplicity_tolerance(m))[1];
  if (symmetric) {
    gap.lambda2 = Complex(gap.lambda2.real(), 0.0);
    gap.fiedler = s->right_vectors.col(1).real();
  }
  return gap;
}

GapInfo spectral_gap(const LaplacianMatrix& l) { return spectral_gap(l.matrix()); }

void normalize_sign(Eigen::VectorXd& v) {
  if (v.size() == 0) return;
  if (v(dominant_index(v)) < 0) v = -v;
}

EigenPair eig_pair(const Eigen::MatrixXd& m, Complex lambda) {
  require_square(m);
  const Eigen::VectorXcd vals = sorted_eigenvalues(m);
  const double tol = simplicity_tolerance(m);
  Eigen::Index best = 0;
  double best_dist = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    const double d = std::abs(vals(i) - lambda);
    if (d < best_dist) {
      best_dist = d;
      best = i;
    }
  }
  if (best_dist > tol) {
    throw Error(ErrorKind::kNotAnEigenvalue,
                "no eigenvalue within " + std::to_string(tol) + " of the requested value");
  }
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (i != best && std::abs(vals(i) - vals(best)) <= tol) {
      throw Error(ErrorKind::kNotSimple, "requested eigenvalue is repeated");
    }
  }

  NullPair np = null_pair(m, vals(best));
  normalize_phase(np.right);
  const Complex dot = np.left.transpose() * np.right;
  if (std::abs(dot) < 1e-14) {
    throw Error(ErrorKind::kNotSimple, "left and right eigenvectors are orthogonal (defective)");
  }
  return EigenPair{vals(best), np.left / dot, np.right};
}

Complex gap_slope(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p) {
  require_square(m);
  if (m.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "gap slope needs n >= 2");
  if (p.rows() != m.rows() || p.cols() != m.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "perturbation shape does not match");
  }
  const Spectrum s = full_spectrum(m);
  if (!s.simple[1]) throw Error(ErrorKind::kGapNotSimple, "lambda2 is repeated");
  Eigen::VectorXcd u, v;
  if (s.symmetric) {
    u = v = s.right_vectors.col(1);
  } else {
    EigenPair pair = eig_pair(m, s.eigenvalues(1));
    u = std::move(pair.left);
    v = std::move(pair.right);
  }
  const Complex num = u.transpose() * p.cast<Complex>() * v;
  const Complex den = u.transpose() * v;
  return num / den;
}

Complex gap_slope(const LaplacianMatrix& l, const Eigen::MatrixXd& p) {
  return gap_slope(l.matrix(), p);
}

double fd_gap_slope(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p, double eps) {
  if (!(eps >= 1e-9 && eps <= 1e-3)) {
    throw Error(ErrorKind::kInvalidArgument, "eps must lie in [1e-9, 1e-3]");
  }
  require_square(m);
  if (m.rows() < 2) throw Error(ErrorKind::kInvalidArgument, "gap slope needs n >= 2");
  if (p.rows() != m.rows() || p.cols() != m.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "perturbation shape does not match");
  }
  const double tol = simplicity_tolerance(m);
  const Eigen::VectorXcd base = sorted_eigenvalues(m);
  const Complex lambda2 = base(1);
  for (Eigen::Index i = 0; i < base.size(); ++i) {
    if (i != 1 && std::abs(base(i) - lambda2) <= tol) {
      throw Error(ErrorKind::kGapNotSimple, "lambda2 is repeated");
    }
  }

  const Eigen::MatrixXd perturbed_matrix = m + eps * p;
  const Eigen::VectorXcd perturbed = sorted_eigenvalues(perturbed_matrix);
  const double target = lambda2.real();

  Eigen::Index best = 0;
  double d1 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < perturbed.size(); ++i) {
    const double d = std::abs(perturbed(i).real() - target);
    if (d < d1) {
      d1 = d;
      best = i;
    }
  }
  const Complex matched = perturbed(best);
  double d2 = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < perturbed.size(); ++i) {
    if (i == best) continue;
    const bool conjugate_partner = std::abs(matched.imag()) > tol &&
                                   std::abs(perturbed(i) - std::conj(matched)) <= tol;
    if (conjugate_partner) continue;
    d2 = std::min(d2, std::abs(perturbed(i).real() - target));
  }
  if (d2 <= 2.0 * d1 + tol) {
    throw Error(ErrorKind::kEigenvalueCollision,
                "perturbed spectrum has two candidates for lambda2 (eps too large?)");
  }
  return (matched.real() - target) / eps;
}

double fd_gap_slope(const LaplacianMatrix& l, const Eigen::MatrixXd& p, double eps) {
  return fd_gap_slope(l.matrix(), p, eps);
}

namespace {
void check_pair(NodeId n, NodeId k, NodeId l) {
  if (k < 0 || l < 0 || k >= n || l >= n) {
    throw Error(ErrorKind::kIndexOutOfRange, "node index outside 0.." + std::to_string(n - 1));
  }
  if (k == l) throw Error(ErrorKind::kInvalidArgument, "link endpoints must differ");
}
}  // namespace

Eigen::MatrixXd link_perturbation(NodeId n, NodeId k, NodeId l) {
  check_pair(n, k, l);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  p(l, l) = 1.0;
  p(l, k) = -1.0;
  return p;
}

Eigen::MatrixXd undirected_link_perturbation(NodeId n, NodeId k, NodeId l) {
  check_pair(n, k, l);
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  p(k, k) = p(l, l) = 1.0;
  p(k, l) = p(l, k) = -1.0;
  return p;
}

}  // namespace netsync
