#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <cmath>
#include <random>
#include <vector>

#include "roboss/kernel.hpp"

using namespace roboss;

namespace {

double naive_gaussian(const std::vector<double>& x, const std::vector<double>& z, double sigma) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d += (x[i] - z[i]) * (x[i] - z[i]);
  return std::exp(-d / (sigma * sigma));
}

Eigen::MatrixXd random_points(std::size_t n, std::size_t dim, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> dist;
  Eigen::MatrixXd X(n, dim);
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = dist(gen);
  return X;
}

}  // namespace

TEST(KernelEval, Examples) {
  const std::vector<double> x{0.3, -1.2, 4.0};
  EXPECT_EQ(kernel_eval(KernelSpec::gaussian(1.0), x, x), 1.0);
  const std::vector<double> a{0.0, 0.0};
  const std::vector<double> b{2.0, 0.0};
  EXPECT_NEAR(kernel_eval(KernelSpec::gaussian(2.0), a, b), naive_gaussian(a, b, 2.0), 1e-16);
  EXPECT_NEAR(kernel_eval(KernelSpec::gaussian(2.0), a, b), 0.367879, 1e-6);
  EXPECT_EQ(kernel_eval(KernelSpec::linear(), std::vector<double>{1, 2}, std::vector<double>{3, -1}), 1.0);
}

TEST(KernelEval, DimensionMismatchCarriesLengths) {
  const std::vector<double> x{1.0, 2.0};
  const std::vector<double> z{1.0, 2.0, 3.0};
  try {
    kernel_eval(KernelSpec::gaussian(1.0), x, z);
    FAIL();
  } catch (const ShapeError& e) {
    EXPECT_EQ(e.expected(), 2u);
    EXPECT_EQ(e.actual(), 3u);
  }
}

TEST(KernelEval, RejectsNonPositiveSigma) {
  const std::vector<double> x{1.0};
  EXPECT_THROW(kernel_eval(KernelSpec::gaussian(0.0), x, x), ParameterError);
  EXPECT_THROW(kernel_eval(KernelSpec::gaussian(-1.0), x, x), ParameterError);
}

TEST(GramMatrix, Examples) {
  Eigen::MatrixXd twin(2, 3);
  twin << 1, 2, 3, 1, 2, 3;
  EXPECT_EQ(gram_matrix(KernelSpec::gaussian(1.0), twin).entries(), Eigen::MatrixXd::Ones(2, 2));

  Eigen::MatrixXd id = Eigen::MatrixXd::Identity(2, 2);
  EXPECT_EQ(gram_matrix(KernelSpec::linear(), id).entries(), id);

  Eigen::MatrixXd line(3, 1);
  line << 0, 1, 2;
  const auto K = gram_matrix(KernelSpec::gaussian(1.0), line);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(K(i, i), 1.0);
  EXPECT_NEAR(K(0, 1), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(K(1, 2), std::exp(-1.0), 1e-16);
  EXPECT_NEAR(K(0, 2), std::exp(-4.0), 1e-16);
}

TEST(GramMatrix, RaggedAndEmptyInputs) {
  EXPECT_THROW(gram_matrix(KernelSpec::linear(), std::vector<std::vector<double>>{{1, 2}, {3}}), ShapeError);
  EXPECT_THROW(gram_matrix(KernelSpec::linear(), std::vector<std::vector<double>>{}), ShapeError);
  EXPECT_THROW(gram_matrix(KernelSpec::linear(), Eigen::MatrixXd(0, 3)), ShapeError);
  const auto K = gram_matrix(KernelSpec::linear(), std::vector<std::vector<double>>{{1, 2}, {3, 4}});
  EXPECT_EQ(K(0, 1), 11.0);
}

TEST(GramMatrix, CapacityLimit) {
  EXPECT_THROW(gram_matrix(KernelSpec::linear(), Eigen::MatrixXd::Zero(kMaxGramSamples + 1, 1)), CapacityError);
}

TEST(GramMatrix, SymmetricBitExactAndUnitDiagonal) {
  const auto X = random_points(40, 5, 3);
  for (const auto& spec : {KernelSpec::gaussian(0.7), KernelSpec::linear()}) {
    const auto K = gram_matrix(spec, X);
    for (std::size_t i = 0; i < K.size(); ++i) {
      for (std::size_t j = 0; j < K.size(); ++j) EXPECT_EQ(K(i, j), K(j, i));
      if (spec.kind == KernelKind::Gaussian) EXPECT_EQ(K(i, i), 1.0);
    }
  }
  const auto G = gram_matrix(KernelSpec::gaussian(0.7), X);
  EXPECT_GT(G.entries().minCoeff(), 0.0);
  EXPECT_LE(G.entries().maxCoeff(), 1.0);
}

TEST(GramMatrix, PositiveSemidefiniteOnRandomPoints) {
  for (unsigned seed = 0; seed < 20; ++seed) {
    const auto X = random_points(5, 3, seed);
    const auto K = gram_matrix(KernelSpec::gaussian(1.0), X);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K.entries());
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9);
  }
}

TEST(KernelRow, Examples) {
  const auto I = gram_matrix(KernelSpec::linear(), Eigen::MatrixXd::Identity(2, 2));
  const auto r0 = kernel_row(I, 0);
  EXPECT_EQ(std::vector<double>(r0.begin(), r0.end()), (std::vector<double>{1, 0}));
  EXPECT_THROW(kernel_row(I, 2), IndexError);

  Eigen::MatrixXd line(3, 1);
  line << 0, 1, 2;
  const auto r1 = kernel_row(gram_matrix(KernelSpec::gaussian(1.0), line), 1);
  EXPECT_NEAR(r1[0], std::exp(-1.0), 1e-16);
  EXPECT_EQ(r1[1], 1.0);
  EXPECT_NEAR(r1[2], std::exp(-1.0), 1e-16);
}

TEST(KernelRow, MatchesPointwiseEvaluation) {
  const auto X = random_points(25, 4, 11);
  const auto spec = KernelSpec::gaussian(1.3);
  const auto K = gram_matrix(spec, X);
  std::mt19937 gen(5);
  std::uniform_int_distribution<std::size_t> pick(0, 24);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t i = pick(gen);
    const std::size_t j = pick(gen);
    EXPECT_EQ(kernel_row(K, j)[i], kernel_eval(spec, Eigen::RowVectorXd(X.row(j)), Eigen::RowVectorXd(X.row(i))));
  }
}

TEST(KernelMatrix, RestrictionEqualsDirectConstruction) {
  const auto X = random_points(12, 3, 2);
  const auto spec = KernelSpec::gaussian(0.9);
  const std::vector<std::size_t> idx{0, 3, 4, 8, 11};
  Eigen::MatrixXd sub(idx.size(), 3);
  for (std::size_t r = 0; r < idx.size(); ++r) sub.row(r) = X.row(idx[r]);
  EXPECT_EQ(gram_matrix(spec, X).restrict_to(idx).entries(), gram_matrix(spec, sub).entries());
}

TEST(CrossKernel, MatchesPointwiseEvaluation) {
  const auto P = random_points(6, 3, 8);
  const auto Q = random_points(4, 3, 9);
  const auto spec = KernelSpec::gaussian(1.1);
  const auto C = cross_kernel(spec, Q, P);
  ASSERT_EQ(C.rows(), 4);
  ASSERT_EQ(C.cols(), 6);
  for (Eigen::Index q = 0; q < 4; ++q)
    for (Eigen::Index j = 0; j < 6; ++j)
      EXPECT_EQ(C(q, j), kernel_eval(spec, Eigen::RowVectorXd(P.row(j)), Eigen::RowVectorXd(Q.row(q))));
  EXPECT_THROW(cross_kernel(spec, random_points(2, 2, 1), P), ShapeError);
}
