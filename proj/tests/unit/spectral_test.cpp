#include <gtest/gtest.h>

#include <cmath>

#include "netsync/directed.hpp"
#include "netsync/error.hpp"
#include "netsync/spectral.hpp"
#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
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

Eigen::VectorXd real_eigenvalues(const Spectrum& s) { return s.eigenvalues.real(); }

void expect_vec_near(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double tol) {
  ASSERT_EQ(a.size(), b.size());
  EXPECT_LE((a - b).cwiseAbs().maxCoeff(), tol) << a.transpose() << "\nvs\n" << b.transpose();
}

TEST(FullSpectrum, PathOfThree) {
  expect_vec_near(real_eigenvalues(full_spectrum(laplacian(testing::load("p3.edges")))),
                  Eigen::Vector3d(0, 1, 3), 1e-12);
}

TEST(FullSpectrum, MasterSlaveUnionOfBlockSpectra) {
  const Spectrum s = full_spectrum(laplacian(testing::load("master_slave.edges")));
  Eigen::VectorXd expected(5);
  expected << 0, 1, 1.5, 2.25, 3;  // {0, 2w, 3w} with w = 0.75, plus {1, 3}
  expect_vec_near(real_eigenvalues(s), expected, 1e-12);
  EXPECT_LE(s.eigenvalues.imag().cwiseAbs().maxCoeff(), 1e-12);
}

TEST(FullSpectrum, ZeroOneByOne) {
  const Spectrum s = full_spectrum(Eigen::MatrixXd::Zero(1, 1));
  ASSERT_EQ(s.size(), 1);
  EXPECT_EQ(s.eigenvalues(0), Complex(0, 0));
}

TEST(FullSpectrum, ComplexPairsOrderedByImaginaryPart) {
  const Spectrum s = full_spectrum(laplacian(testing::load("cycle3.edges")));
  EXPECT_NEAR(s.eigenvalues(1).real(), 1.5, 1e-12);
  EXPECT_NEAR(s.eigenvalues(1).imag(), -std::sqrt(3.0) / 2, 1e-12);
  EXPECT_NEAR(s.eigenvalues(2).imag(), std::sqrt(3.0) / 2, 1e-12);
}

TEST(FullSpectrum, InvariantsOnRandomDigraphs) {
  testing::Rng rng(3);
  std::uniform_real_distribution<double> coin(0.0, 1.0), weight(0.2, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    const NodeId n = 2 + trial % 10;
    std::vector<Edge> edges;
    for (NodeId a = 0; a < n; ++a)
      for (NodeId b = 0; b < n; ++b)
        if (a != b && coin(rng) < 0.35) edges.push_back({a, b, weight(rng)});
    const auto g = build_graph(n, edges);
    const Eigen::MatrixXd l = laplacian(g).matrix();
    const Spectrum s = full_spectrum(l);
    const bool rooted = condensation(g).has_spanning_tree;
    const double norm = std::max(1.0, inf_norm(l));
    const double tol = 1e-9 * norm;
    EXPECT_LE(std::abs(s.eigenvalues(0)), tol);
    const Eigen::VectorXcd v0 = s.right_vectors.col(0);
    if (rooted) EXPECT_LE((v0 - Eigen::VectorXcd::Constant(n, v0(0))).cwiseAbs().maxCoeff(), 1e-8)
        << "kernel vector not constant";
    for (Eigen::Index i = 0; i < n; ++i) {
      EXPECT_GE(s.eigenvalues(i).real(), -tol);
      const Eigen::VectorXcd v = s.right_vectors.col(i);
      const Eigen::VectorXcd u = s.left_vectors.col(i);
      const Complex lam = s.eigenvalues(i);
      EXPECT_LE((l.cast<Complex>() * v - lam * v).cwiseAbs().maxCoeff(), tol);
      const double u_scale = std::max(1.0, u.cwiseAbs().maxCoeff());
      EXPECT_LE((u.transpose() * l.cast<Complex>() - lam * u.transpose()).cwiseAbs().maxCoeff(),
                tol * u_scale);
    }
    for (Eigen::Index i = 1; i < n; ++i) EXPECT_LE(s.eigenvalues(i - 1).real(), s.eigenvalues(i).real());
  }
}

TEST(FullSpectrum, SymmetricMatchesJacobiOracle) {
  testing::Rng rng(8);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = testing::random_connected_undirected(rng, 2 + trial % 11, 0.3, true);
    const Eigen::MatrixXd l = laplacian(g).matrix();
    const Spectrum s = full_spectrum(l);
    EXPECT_TRUE(s.symmetric);
    EXPECT_LE(s.eigenvalues.imag().cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_EQ(s.left_vectors, s.right_vectors);
    const auto ref = testing::jacobi_eigenvalues(l);
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(s.eigenvalues(i).real(), ref[i], 1e-10);
  }
}

TEST(SpectralGap, WeightedFive) {
  const GapInfo gap = spectral_gap(laplacian(testing::load("weighted5.edges")));
  EXPECT_NEAR(gap.lambda2.real(), 2.0, 1e-12);
  EXPECT_TRUE(gap.is_simple);
  ASSERT_TRUE(gap.fiedler);
  Eigen::VectorXd expected(5);
  expected << 0, 1, 0, 0, -1;  // sign convention: tie between |v_1| and |v_4| goes to node 1
  expect_vec_near(*gap.fiedler, expected / std::sqrt(2.0), 1e-12);
}

TEST(SpectralGap, HubFive) {
  const GapInfo gap = spectral_gap(laplacian(testing::load("hub5.edges")));
  EXPECT_NEAR(gap.lambda2.real(), 1.0, 1e-12);
  Eigen::VectorXd expected(5);
  expected << 3, 0, -1, -1, -1;  // direction (-3, 0, 1, 1, 1), largest entry made positive
  expect_vec_near(*gap.fiedler, expected / std::sqrt(12.0), 1e-12);
}

TEST(SpectralGap, PathOfThree) {
  const GapInfo gap = spectral_gap(laplacian(testing::load("p3.edges")));
  EXPECT_NEAR(gap.lambda2.real(), 1.0, 1e-12);
  expect_vec_near(*gap.fiedler, Eigen::Vector3d(1, 0, -1) / std::sqrt(2.0), 1e-12);
  const Eigen::MatrixXd l = laplacian(testing::load("p3.edges")).matrix();
  EXPECT_LE((l * *gap.fiedler - gap.lambda2.real() * *gap.fiedler).norm(), 1e-12);
}

TEST(SpectralGap, Errors) {
  EXPECT_EQ(kind_of([] { spectral_gap(laplacian(testing::load("disjoint.edges"))); }),
            ErrorKind::kNotConnected);
  EXPECT_EQ(kind_of([] { spectral_gap(Eigen::MatrixXd::Zero(1, 1)); }), ErrorKind::kInvalidArgument);
  const auto k3 = build_graph(3, {{0, 1, 1}, {1, 0, 1}, {0, 2, 1}, {2, 0, 1}, {1, 2, 1}, {2, 1, 1}});
  EXPECT_FALSE(spectral_gap(laplacian(k3)).is_simple);
}

TEST(SpectralGap, DirectedHasNoFiedler) {
  const GapInfo gap = spectral_gap(laplacian(testing::load("master_slave.edges")));
  EXPECT_FALSE(gap.fiedler);
  EXPECT_NEAR(gap.lambda2.real(), 1.0, 1e-12);
}

TEST(EigPair, TwoByTwo) {
  Eigen::Matrix2d m;
  m << 2, -1, -1, 2;
  const EigenPair one = eig_pair(m, 1.0);
  const Eigen::Vector2d a = Eigen::Vector2d(1, 1) / std::sqrt(2.0);
  expect_vec_near(one.right.real(), a, 1e-12);
  expect_vec_near(one.left.real(), a, 1e-12);
  const EigenPair three = eig_pair(m, 3.0);
  const Eigen::Vector2d b = Eigen::Vector2d(1, -1) / std::sqrt(2.0);
  expect_vec_near(three.right.real(), b, 1e-12);
  expect_vec_near(three.left.real(), b, 1e-12);
}

TEST(EigPair, SymmetricMatchesFiedler) {
  const Eigen::MatrixXd l = laplacian(testing::load("hub5.edges")).matrix();
  const EigenPair p = eig_pair(l, 1.0);
  const Eigen::VectorXd f = *spectral_gap(l).fiedler;
  expect_vec_near(p.right.real(), f, 1e-10);
  expect_vec_near(p.left.real(), f, 1e-10);
}

TEST(EigPair, NormalizedAndResidualOnDirected) {
  const Eigen::MatrixXd l = laplacian(testing::load("cycle3.edges")).matrix();
  const Complex lam(1.5, std::sqrt(3.0) / 2);
  const EigenPair p = eig_pair(l, lam);
  EXPECT_NEAR(std::abs(Complex(p.left.transpose() * p.right) - 1.0), 0.0, 1e-12);
  EXPECT_LE((l.cast<Complex>() * p.right - lam * p.right).norm(), 1e-10);
  EXPECT_LE((p.left.transpose() * l.cast<Complex>() - lam * p.left.transpose()).norm(), 1e-10);
}

TEST(EigPair, Errors) {
  Eigen::Matrix2d m;
  m << 2, -1, -1, 2;
  EXPECT_EQ(kind_of([&] { eig_pair(m, 2.0); }), ErrorKind::kNotAnEigenvalue);
  const Eigen::MatrixXd k3 = 3 * Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Ones(3, 3);
  EXPECT_EQ(kind_of([&] { eig_pair(k3, 3.0); }), ErrorKind::kNotSimple);
}

TEST(GapSlope, Examples) {
  const LaplacianMatrix l = laplacian(testing::load("p3.edges"));
  EXPECT_NEAR(gap_slope(l, link_perturbation(3, 0, 2)).real(), 1.0, 1e-12);
  EXPECT_EQ(gap_slope(l, Eigen::MatrixXd::Zero(3, 3)), Complex(0, 0));
  const LaplacianMatrix r = laplacian(testing::load("weighted5.edges"));
  EXPECT_NEAR(gap_slope(r, r.matrix()).real(), 2.0, 1e-12);
}

TEST(GapSlope, RepeatedGapRefused) {
  const Eigen::MatrixXd k3 = 3 * Eigen::MatrixXd::Identity(3, 3) - Eigen::MatrixXd::Ones(3, 3);
  EXPECT_EQ(kind_of([&] { gap_slope(k3, link_perturbation(3, 0, 1)); }), ErrorKind::kGapNotSimple);
  EXPECT_EQ(kind_of([&] { fd_gap_slope(k3, link_perturbation(3, 0, 1)); }), ErrorKind::kGapNotSimple);
}

TEST(FdGapSlope, Examples) {
  const LaplacianMatrix l = laplacian(testing::load("p3.edges"));
  EXPECT_NEAR(fd_gap_slope(l, link_perturbation(3, 0, 2), 1e-6), 1.0, 1e-4);
  EXPECT_EQ(fd_gap_slope(l, Eigen::MatrixXd::Zero(3, 3), 1e-6), 0.0);
  EXPECT_EQ(kind_of([&] { fd_gap_slope(l, Eigen::MatrixXd::Zero(3, 3), 1e-2); }),
            ErrorKind::kInvalidArgument);

  // Single arc from node 4 to node 2 (1-based) with weight 2 on the master-slave fixture.
  const auto g = testing::load("master_slave.edges");
  const Eigen::MatrixXd p = 2.0 * link_perturbation(5, 3, 1);
  EXPECT_NEAR(fd_gap_slope(laplacian(g), p, 1e-6), -1.0, 1e-4);
}

TEST(FdGapSlope, AgreesWithAnalyticOnRandomGraphs) {
  testing::Rng rng(21);
  std::uniform_real_distribution<double> weight(0.1, 2.0);
  int checked = 0;
  for (int trial = 0; checked < 200 && trial < 1000; ++trial) {
    const NodeId n = 2 + trial % 11;
    const auto g = testing::random_connected_undirected(rng, n, 0.3, true);
    const LaplacianMatrix l = laplacian(g);
    if (!spectral_gap(l).is_simple) continue;
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    NodeId k = node(rng), m = node(rng);
    while (m == k) m = node(rng);
    const Eigen::MatrixXd p = weight(rng) * link_perturbation(n, k, m);
    const double analytic = gap_slope(l, p).real();
    const double fd = fd_gap_slope(l, p, 1e-6);
    EXPECT_LE(std::abs(analytic - fd), 1e-3 * std::max(1.0, std::abs(analytic)));
    EXPECT_NEAR(gap_slope(l, undirected_link_perturbation(n, k, m)).real(),
                testing::jacobi_gap_slope(l.matrix(), undirected_link_perturbation(n, k, m)), 1e-5);
    ++checked;
  }
  EXPECT_EQ(checked, 200);
}

TEST(FdGapSlope, AgreesOnDirectedGraphs) {
  testing::Rng rng(4);
  int checked = 0;
  for (int trial = 0; checked < 100 && trial < 500; ++trial) {
    const auto g = testing::random_master_slave(rng, 1 + trial % 4, 1 + trial % 5, 1.0, 1.0);
    const LaplacianMatrix l = laplacian(g);
    const Spectrum s = full_spectrum(l);
    if (!s.simple[1]) continue;
    const NodeId n = g.size();
    std::uniform_int_distribution<NodeId> node(0, n - 1);
    NodeId k = node(rng), m = node(rng);
    while (m == k) m = node(rng);
    const Eigen::MatrixXd p = link_perturbation(n, k, m);
    const double analytic = gap_slope(l, p).real();
    try {
      const double fd = fd_gap_slope(l, p, 1e-6);
      EXPECT_LE(std::abs(analytic - fd), 1e-3 * std::max(1.0, std::abs(analytic)));
      ++checked;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kEigenvalueCollision);
    }
  }
  EXPECT_GE(checked, 90);
}

TEST(Monotonicity, SupergraphsNeverLowerTheGap) {
  testing::Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto g = testing::random_connected_undirected(rng, 2 + trial % 11, 0.25, true);
    const auto h = testing::random_supergraph(rng, g);
    const double a = spectral_gap(laplacian(g)).lambda2.real();
    const double b = spectral_gap(laplacian(h)).lambda2.real();
    EXPECT_LE(a, b + 1e-10);
  }
}

TEST(LinkPerturbation, Shape) {
  const Eigen::MatrixXd p = link_perturbation(3, 0, 2);
  EXPECT_EQ(p(2, 2), 1.0);
  EXPECT_EQ(p(2, 0), -1.0);
  EXPECT_EQ(p.cwiseAbs().sum(), 2.0);
  EXPECT_EQ(kind_of([] { link_perturbation(3, 1, 1); }), ErrorKind::kInvalidArgument);
  EXPECT_EQ(kind_of([] { link_perturbation(3, 1, 3); }), ErrorKind::kIndexOutOfRange);
}

TEST(FullSpectrum, LeftVectorsWithRepeatedSlaveEigenvalues) {
  // Directed ring master driving a symmetric ring slave: the slave spectrum is
  // doubly degenerate.
  const NodeId n1 = 128, n2 = 128;
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
  const Eigen::MatrixXd m = laplacian(build_graph(n1 + n2, edges)).matrix();
  const Spectrum s = full_spectrum(m);
  int simple = 0;
  for (Eigen::Index j = 0; j < s.size(); ++j) {
    if (!s.simple[j]) continue;
    ++simple;
    const Eigen::VectorXcd u = s.left_vectors.col(j);
    const Eigen::VectorXcd v = s.right_vectors.col(j);
    EXPECT_NEAR(std::abs(Complex(u.transpose() * v) - 1.0), 0.0, 1e-8);
    const double resid = (m.transpose().cast<Complex>() * u - s.eigenvalues(j) * u).norm();
    EXPECT_LT(resid, 1e-8 * std::max(1.0, u.norm()));
  }
  EXPECT_GT(simple, 100);
}

TEST(FullSpectrum, LeftVectorsOfDefectiveMatrix) {
  // 0 <-> 1 then the chain 1 -> 2 -> 3: eigenvalue 1 is a 2x2 Jordan block.
  const Eigen::MatrixXd m =
      laplacian(build_graph(4, {{0, 1, 1.0}, {1, 0, 2.0}, {1, 2, 1.0}, {2, 3, 1.0}})).matrix();
  const Spectrum s = full_spectrum(m);
  ASSERT_EQ(s.size(), 4);
  EXPECT_NEAR(s.eigenvalues(3).real(), 3.0, 1e-12);
  EXPECT_FALSE(s.simple[1]);
  for (Eigen::Index j : {0, 3}) {
    ASSERT_TRUE(s.simple[j]);
    const Eigen::VectorXcd u = s.left_vectors.col(j);
    EXPECT_NEAR(std::abs(Complex(u.transpose() * s.right_vectors.col(j)) - 1.0), 0.0, 1e-10);
    EXPECT_LT((m.transpose().cast<Complex>() * u - s.eigenvalues(j) * u).norm(), 1e-10 * u.norm());
  }
}

}  // namespace
}  // namespace netsync
