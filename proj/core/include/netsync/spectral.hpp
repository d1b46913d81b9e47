#pragma once

#include <complex>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "netsync/graph.hpp"

namespace netsync {

using Complex = std::complex<double>;

// Max absolute row sum.
double inf_norm(const Eigen::MatrixXd& m);

// Eigenvalues closer than this are treated as one repeated eigenvalue.
double simplicity_tolerance(const Eigen::MatrixXd& m);

// Eigenvalues sorted by ascending real part, ties by ascending imaginary part.
// Column i of right_vectors / left_vectors pairs with eigenvalues(i); right
// vectors have unit 2-norm and left vectors satisfy u_i^T v_i = 1 whenever the
// eigenvector matrix is invertible.
struct Spectrum {
  Eigen::VectorXcd eigenvalues;
  Eigen::MatrixXcd right_vectors;
  Eigen::MatrixXcd left_vectors;
  std::vector<bool> simple;
  bool symmetric = false;

  Eigen::Index size() const { return eigenvalues.size(); }
};

// Throws kConvergenceFailure if the QR iteration fails.
Spectrum full_spectrum(const Eigen::MatrixXd& m);
Spectrum full_spectrum(const LaplacianMatrix& l);

// Sorted eigenvalues without vectors.
Eigen::VectorXcd sorted_eigenvalues(const Eigen::MatrixXd& m);

enum class GapLocation { kWhole, kMaster, kSlave };

std::string_view to_string(GapLocation location);

struct GapInfo {
  Complex lambda2;
  bool is_simple = false;
  std::optional<Eigen::VectorXd> fiedler;  // symmetric input only
  GapLocation location = GapLocation::kWhole;
};

// Throws kInvalidArgument for n < 2 and kNotConnected when Re(lambda2) is not
// positive.
GapInfo spectral_gap(const Eigen::MatrixXd& m);
GapInfo spectral_gap(const LaplacianMatrix& l);

// Makes the entry of largest magnitude positive; ties go to the lowest index.
void normalize_sign(Eigen::VectorXd& v);

struct EigenPair {
  Complex lambda;
  Eigen::VectorXcd left;
  Eigen::VectorXcd right;  // unit 2-norm, left^T right = 1
};

// Throws kNotAnEigenvalue or kNotSimple.
EigenPair eig_pair(const Eigen::MatrixXd& m, Complex lambda);

// First-order rate u^T P v / u^T v of lambda2 under m + eps * P.
// Throws kGapNotSimple.
Complex gap_slope(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p);
Complex gap_slope(const LaplacianMatrix& l, const Eigen::MatrixXd& p);

// (Re lambda2(m + eps P) - Re lambda2(m)) / eps from two eigensolves.
// Throws kInvalidArgument (eps outside [1e-9, 1e-3]), kGapNotSimple or
// kEigenvalueCollision.
double fd_gap_slope(const Eigen::MatrixXd& m, const Eigen::MatrixXd& p, double eps = 1e-6);
double fd_gap_slope(const LaplacianMatrix& l, const Eigen::MatrixXd& p, double eps = 1e-6);

// Laplacian of a single unit arc k -> l: row l gets +1 at (l, l), -1 at (l, k).
Eigen::MatrixXd link_perturbation(NodeId n, NodeId k, NodeId l);
// Laplacian of a unit undirected edge {k, l}.
Eigen::MatrixXd undirected_link_perturbation(NodeId n, NodeId k, NodeId l);

}  // namespace netsync
