#include <gtest/gtest.h>

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pqnorm/oracle.hpp"

using namespace pqnorm;

namespace {

Matrix random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  return A;
}

// ||A||_{inf->q} is attained at a sign vector.
double brute_force_inf(const Matrix& A, double q) {
  double best = 0.0;
  const Eigen::Index n = A.cols();
  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    Vector x(n);
    for (Eigen::Index j = 0; j < n; ++j) x[j] = (mask >> j) & 1u ? 1.0 : -1.0;
    best = std::max(best, counting_norm(A * x, q));
  }
  return best;
}

}  // namespace

TEST(NormPower, SpectralNorm) {
  Rng rng(40, 0);
  for (int t = 0; t < 5; ++t) {
    const Matrix A = random_matrix(4, 3, rng);
    Eigen::JacobiSVD<Matrix> svd(A);
    EXPECT_NEAR(norm_power(A, 2.0, 2.0).value, svd.singularValues()[0], 1e-9);
  }
}

TEST(NormPower, InfToOneMatchesBruteForce) {
  Rng rng(41, 0);
  for (int t = 0; t < 10; ++t) {
    const Matrix A = random_matrix(5, 5, rng);
    PowerOptions opt;
    opt.seed = static_cast<std::uint64_t>(t);
    EXPECT_NEAR(norm_power(A, kInf, 1.0, opt).value, brute_force_inf(A, 1.0), 1e-10);
    EXPECT_NEAR(norm_power(A, kInf, 2.0, opt).value, brute_force_inf(A, 2.0), 1e-9);
  }
}

TEST(NormPower, OneToQIsMaxColumnNorm) {
  Rng rng(42, 0);
  const Matrix A = random_matrix(4, 5, rng);
  for (double q : {1.0, 1.5, 3.0}) {
    double best = 0.0;
    for (Eigen::Index j = 0; j < A.cols(); ++j) best = std::max(best, counting_norm(A.col(j), q));
    EXPECT_NEAR(norm_power(A, 1.0, q).value, best, 1e-12);
  }
}

TEST(NormPower, CertificateVectorsAreConsistent) {
  Rng rng(43, 0);
  const Matrix A = random_matrix(4, 4, rng);
  const PowerResult r = norm_power(A, 4.0, 4.0 / 3.0);
  EXPECT_NEAR(counting_norm(r.x, 4.0), 1.0, 1e-12);
  EXPECT_NEAR(counting_norm(r.y, 4.0), 1.0, 1e-9);
  EXPECT_NEAR(counting_norm(A * r.x, 4.0 / 3.0), r.value, 1e-12);
  EXPECT_NEAR(r.y.dot(A * r.x), r.value, 1e-9);
  for (std::size_t i = 1; i < r.trace.size(); ++i) EXPECT_GE(r.trace[i], r.trace[i - 1] - 1e-12);
}

TEST(NormPower, InvariantUnderSignedPermutations) {
  Rng rng(44, 0);
  const Matrix A = random_matrix(4, 3, rng);
  std::vector<int> rows = {2, 0, 3, 1};
  std::vector<int> cols = {1, 2, 0};
  Matrix B(4, 3);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = (i % 2 ? -1.0 : 1.0) * (j == 1 ? -1.0 : 1.0) * A(rows[i], cols[j]);
  for (const auto& [p, q] : {std::pair{kInf, 1.0}, std::pair{3.0, 1.5}, std::pair{2.0, 2.0}})
    EXPECT_NEAR(norm_power(A, p, q).value, norm_power(B, p, q).value, 1e-9);
}

TEST(NormPower, ScalesLinearly) {
  Rng rng(45, 0);
  const Matrix A = random_matrix(3, 3, rng);
  EXPECT_NEAR(norm_power(-2.5 * A, 4.0, 1.5).value, 2.5 * norm_power(A, 4.0, 1.5).value, 1e-9);
}

TEST(NormPower, RejectsBadInput) {
  EXPECT_THROW(norm_power(Matrix(0, 0), 2.0, 2.0), DomainError);
  EXPECT_THROW(norm_power(Matrix::Ones(2, 2), 0.5, 2.0), DomainError);
  PowerOptions opt;
  opt.starts = 0;
  EXPECT_THROW(norm_power(Matrix::Ones(2, 2), 2.0, 2.0, opt), DomainError);
}

TEST(NormGrid, LowerBoundCloseToPower) {
  Rng rng(46, 0);
  for (Eigen::Index n : {1, 2, 3}) {
    const Matrix A = random_matrix(3, n, rng);
    const double power = norm_power(A, 3.0, 1.5).value;
    const double grid = norm_grid(A, 3.0, 1.5, 400);
    EXPECT_LE(grid, power * (1.0 + 1e-9));
    EXPECT_GE(grid, power * (1.0 - 1e-3));
  }
  EXPECT_THROW(norm_grid(Matrix::Ones(2, 4), 2.0, 2.0, 10), DomainError);
}

TEST(ExpectationNorm, OperatorConversion) {
  // ||A||_{L_p -> L_q} = ||A||_{p->q} n^{1/p} / m^{1/q}.
  EXPECT_NEAR(expectation_operator_norm(2.0, 4, 9, 2.0, 2.0), 2.0 * 3.0 / 2.0, 1e-14);
  EXPECT_NEAR(expectation_operator_norm(1.0, 8, 2, kInf, 1.0), 1.0 / 8.0, 1e-14);
}

TEST(Duality, TransposeWithConjugates) {
  Rng rng(47, 0);
  for (const auto& [p, q] : {std::pair{kInf, 1.0}, std::pair{4.0, 4.0 / 3.0}, std::pair{1.5, 3.0}}) {
    const DualityReport r = duality_check(random_matrix(3, 4, rng), p, q);
    EXPECT_TRUE(r.pass) << p << " " << q << " " << r.difference;
  }
}

TEST(Kronecker, MixedProduct) {
  Rng rng(48, 0);
  const Matrix A = random_matrix(2, 3, rng);
  const Matrix B = random_matrix(3, 2, rng);
  Vector x(3);
  x << 1.0, -2.0, 0.5;
  Vector y(2);
  y << 0.3, 1.0;
  const Vector lhs = kronecker(A, B) * kronecker(x, y);
  const Vector rhs = kronecker(Vector(A * x), Vector(B * y));
  EXPECT_LT((lhs - rhs).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kronecker, MultiplicativeForPLessThanQ) {
  Rng rng(49, 0);
  for (const auto& [p, q] : {std::pair{2.0, 4.0}, std::pair{1.5, 3.0}, std::pair{2.0, 2.0}}) {
    const KronReport r = kron_check(random_matrix(2, 2, rng), random_matrix(2, 2, rng), p, q);
    EXPECT_TRUE(r.pass) << p << " " << q << " gap " << r.relative_gap;
  }
  EXPECT_THROW(kron_check(Matrix::Ones(2, 2), Matrix::Ones(2, 2), 4.0, 2.0), DomainError);
}

TEST(Embedding, DefaultRowsAndCap) {
  EXPECT_EQ(default_embedding_rows(5, 4.0), 1250u);
  EXPECT_EQ(default_embedding_rows(100, 6.0), 100000u);
  EXPECT_THROW(embedding_experiment(3, 200000, 4.0, 10, 0), DomainError);
  EXPECT_THROW(embedding_experiment(3, 100, 1.5, 10, 0), DomainError);
}

TEST(Embedding, NearIsometryAndSeededRepeat) {
  const EmbeddingReport r = embedding_experiment(3, 4000, 4.0, 30, 7);
  EXPECT_EQ(r.ratios.size(), 30u);
  EXPECT_GE(r.min_ratio, 0.9);
  EXPECT_LE(r.max_ratio, 1.1);
  EXPECT_GE(r.adversarial_max_ratio, *std::max_element(r.ratios.begin(), r.ratios.end()) - 1e-12);
  EXPECT_EQ(embedding_experiment(3, 4000, 4.0, 30, 7).max_ratio, r.max_ratio);
}
