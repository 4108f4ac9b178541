#include <gtest/gtest.h>

#include <cmath>

#include "pqnorm/rounding.hpp"

using namespace pqnorm;

namespace {

Matrix random_matrix(Eigen::Index m, Eigen::Index n, Rng& rng) {
  Matrix A(m, n);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j) A(i, j) = rng.normal();
  return A;
}

}  // namespace

TEST(KrivineGram, UnitDiagonalAndPsd) {
  Rng rng(60, 0);
  const Matrix A = random_matrix(3, 4, rng);
  for (const auto& [p, q] : {std::pair{kInf, 1.0}, std::pair{4.0, 4.0 / 3.0}, std::pair{3.0, 1.5}}) {
    const ExponentPair pair = ExponentPair::from_pq(p, q);
    const KrivineGram kg = build_krivine_gram(solve_cp(A, pair), pair);
    EXPECT_NEAR(kg.c, compute_c(pair), 1e-12);
    EXPECT_TRUE(kg.psd_ok) << kg.min_eig;
    for (Eigen::Index i = 0; i < kg.M.rows(); ++i) EXPECT_NEAR(kg.M(i, i), 1.0, 1e-10);
    EXPECT_TRUE(kg.M.isApprox(kg.M.transpose()));
  }
}

TEST(KrivineGram, CrossBlockInvertsToScaledCorrelation) {
  Rng rng(61, 0);
  const Matrix A = random_matrix(3, 3, rng);
  const ExponentPair pair = ExponentPair::from_pq(4.0, 4.0 / 3.0);
  const GramSolution sol = solve_cp(A, pair);
  const KrivineGram kg = build_krivine_gram(sol, pair);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 3; ++j) {
      const double cos_ij = sol.U.row(i).normalized().dot(sol.V.row(j).normalized());
      EXPECT_NEAR(f_eval(pair, kg.M(i, 3 + j)), kg.c * cos_ij, 1e-10);
    }
}

TEST(GramRows, FactorReproducesCrossBlock) {
  Rng rng(62, 0);
  const Matrix A = random_matrix(4, 3, rng);
  const ExponentPair pair = ExponentPair::from_pq(kInf, 1.0);
  const PreparedRounding pr = prepare_rounding(solve_cp(A, pair), pair);
  EXPECT_LT(pr.rows.reconstruction_error, 1e-9);
  EXPECT_LT(pr.rows.clipped_mass, 1e-9);
  EXPECT_FALSE(pr.rows.degenerate_scaling);
  EXPECT_EQ(pr.rows.phi.rows(), 4);
  EXPECT_EQ(pr.rows.psi.rows(), 3);
}

TEST(GramRows, FlagsDegenerateScaling) {
  // Non-unit rows with a = b = 0 cannot be rescaled by 1/a, 1/b.
  GramSolution sol;
  sol.U = Matrix::Identity(2, 2) * 0.5;
  sol.V = Matrix::Identity(2, 2);
  const ExponentPair pair = ExponentPair::from_pq(kInf, 1.0);
  const GramRows rows = gram_rows(build_krivine_gram(sol, pair));
  EXPECT_TRUE(rows.degenerate_scaling);
}

TEST(GramRows, RejectsStronglyIndefinite) {
  KrivineGram kg;
  kg.m = 1;
  kg.n = 1;
  kg.M = (Matrix(2, 2) << 1.0, 3.0, 3.0, 1.0).finished();
  kg.u_norms = Vector::Ones(1);
  kg.v_norms = Vector::Ones(1);
  EXPECT_THROW(gram_rows(kg), NumericError);
}

TEST(HolderSample, DenominatorsNormaliseExactly) {
  Rng rng(63, 0);
  const Matrix A = random_matrix(3, 4, rng);
  const ExponentPair pair = ExponentPair::from_pq(4.0, 4.0 / 3.0);
  const PreparedRounding pr = prepare_rounding(solve_cp(A, pair), pair);
  Rng g(63, 1);
  for (int t = 0; t < 20; ++t) {
    const HolderSample s = holder_sample(pr.rows, pair, gaussian_vector(pr.rows.phi.cols(), g));
    EXPECT_NEAR(counting_norm(s.y_raw / s.y_denominator, pair.q_star), 1.0, 1e-10);
    EXPECT_NEAR(counting_norm(s.x_raw / s.x_denominator, pair.p), 1.0, 1e-10);
  }
}

TEST(HolderSample, DenominatorExpectation) {
  // E ||phi g||_q^q = sum_i ||phi_i||^q E|g|^q, whatever the correlations between rows.
  Rng rng(64, 0);
  const Matrix A = random_matrix(3, 3, rng);
  const ExponentPair pair = ExponentPair::from_pq(kInf, 1.5);
  const PreparedRounding pr = prepare_rounding(solve_cp(A, pair), pair);
  Vector u_norm = pr.rows.phi.rowwise().norm();
  double expected = 0.0;
  for (Eigen::Index i = 0; i < u_norm.size(); ++i) expected += std::pow(u_norm[i], pair.q) * gaussian_abs_moment(pair.q);
  Rng g(64, 1);
  const int N = 100000;
  double sum = 0.0;
  double sum2 = 0.0;
  for (int t = 0; t < N; ++t) {
    const double v = std::pow(counting_norm(pr.rows.phi * gaussian_vector(pr.rows.phi.cols(), g), pair.q), pair.q);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / N;
  const double se = std::sqrt((sum2 / N - mean * mean) / N);
  EXPECT_LE(std::abs(mean - expected), 4.0 * se);
}

TEST(RoundOnce, FeasibleAndBelowNorm) {
  Rng rng(65, 0);
  const Matrix A = random_matrix(4, 4, rng);
  for (const auto& [p, q] : {std::pair{kInf, 1.0}, std::pair{4.0, 4.0 / 3.0}, std::pair{2.0, 1.0}, std::pair{kInf, 2.0}}) {
    const ExponentPair pair = ExponentPair::from_pq(p, q);
    const PreparedRounding pr = prepare_rounding(solve_cp(A, pair), pair);
    const double norm = norm_power(A, p, q).value;
    Rng g(65, 1);
    for (int t = 0; t < 10; ++t) {
      const RoundedPair r = round_once(pr.rows, A, pair, g);
      EXPECT_NEAR(counting_norm(r.y, pair.q_star), 1.0, 1e-12);
      EXPECT_NEAR(counting_norm(r.x, pair.p), 1.0, 1e-12);
      EXPECT_LE(std::abs(r.value), norm * (1.0 + 1e-9));
    }
  }
}

TEST(RoundBest, SeededAndWithinGuarantee) {
  Rng rng(66, 0);
  const Matrix A = random_matrix(5, 4, rng);
  const ExponentPair pair = ExponentPair::from_pq(kInf, 1.0);
  const GramSolution sol = solve_cp(A, pair);
  const RoundedPair r1 = round_best(A, sol, pair, 200, 9);
  const RoundedPair r2 = round_best(A, sol, pair, 200, 9);
  EXPECT_EQ(r1.value, r2.value);
  EXPECT_EQ(r1.trial, r2.trial);
  EXPECT_GT(r1.value, 0.0);
  EXPECT_LE(sol.value, approx_ratio(pair, true).ratio * r1.value * 1.05);
  EXPECT_THROW(round_best(A, sol, pair, 0, 9), DomainError);
}

TEST(RoundOnce, RejectsShapeMismatch) {
  Rng rng(67, 0);
  const Matrix A = random_matrix(3, 3, rng);
  const ExponentPair pair = ExponentPair::from_pq(kInf, 1.0);
  const PreparedRounding pr = prepare_rounding(solve_cp(A, pair), pair);
  Rng g(0, 0);
  EXPECT_THROW(round_once(pr.rows, Matrix::Ones(2, 3), pair, g), DomainError);
}
