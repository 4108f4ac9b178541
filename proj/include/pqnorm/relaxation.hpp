#pragma once

// The convex relaxation CP(A) of the p->q norm,
//
//   maximise   sum_ij A_ij <u_i, v_j>
//   subject to sum_i ||u_i||^{q*} <= 1,  sum_j ||v_j||^p <= 1,
//
// solved through a low-rank factorisation (U, V), and its dual
//
//   minimise   (xi_Y(s) + xi_X(t)) / 2
//   subject to [[D_s, -A], [-A^T, D_t]] PSD,
//
// with xi_Y(s) = ||s||_{(q*/2)*} and xi_X(t) = ||t||_{(p/2)*}.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "pqnorm/common.hpp"
#include "pqnorm/norms.hpp"
#include "pqnorm/oracle.hpp"
#include "pqnorm/rng.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

struct CpOptions {
  std::size_t rank = 0;  // 0: m + n
  std::size_t max_iters = 20000;
  double tol = 1e-8;      // relative objective change over `window` iterations
  std::size_t window = 50;
  std::size_t restarts = 5;
  std::uint64_t seed = 0;
  double warm_noise = 1e-2;
};

struct GramSolution {
  Matrix U;  // m x r
  Matrix V;  // n x r
  double value = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
  /// Rank-one value from the power-method warm start.
  double warm_start_value = 0.0;
  /// Objective after every iteration of the returned run.
  std::vector<double> trace;
};

namespace detail {

/// sum_i ||row_i||^r <= 1 (r = inf: max_i ||row_i|| <= 1), returned as the
/// left-hand side so callers can compare against 1 + slack.
inline double row_constraint(const Matrix& X, double r) {
  const Vector norms = X.rowwise().norm();
  if (std::isinf(r)) return norms.size() ? norms.maxCoeff() : 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < norms.size(); ++i) s += std::pow(norms[i], r);
  return s;
}

/// argmax_X <X, W> subject to sum_i ||x_i||^r <= 1: each row points along
/// W's row, with lengths the l_r-ball maximiser of W's row norms.
inline Matrix best_rows(const Matrix& W, double r) {
  const Vector wn = W.rowwise().norm();
  const Vector len = unit_ball_maximizer(wn, r);
  Matrix X = Matrix::Zero(W.rows(), W.cols());
  for (Eigen::Index i = 0; i < W.rows(); ++i)
    if (wn[i] > 0.0) X.row(i) = W.row(i) * (len[i] / wn[i]);
  return X;
}

inline double bilinear(const Matrix& A, const Matrix& U, const Matrix& V) { return (U.transpose() * A * V).trace(); }

}  // namespace detail

/// True when (U, V) satisfies both CP(A) constraints within `slack`.
inline bool cp_feasible(const GramSolution& sol, const ExponentPair& pair, double slack = 1e-8) {
  return detail::row_constraint(sol.U, pair.q_star) <= 1.0 + slack && detail::row_constraint(sol.V, pair.p) <= 1.0 + slack;
}

/// Alternating exact block ascent on the factorised CP(A): with V fixed the
/// optimal U is available in closed form and vice versa, so every half-step
/// is a projected gradient step with exact line search and the objective is
/// nondecreasing. Run from a perturbed power-method warm start plus random
/// restarts; the best run is returned, never worse than the rank-one start.
inline GramSolution solve_cp(const Matrix& A, const ExponentPair& pair, const CpOptions& opt = {}) {
  check_matrix(A);
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const Eigen::Index r = opt.rank ? static_cast<Eigen::Index>(opt.rank) : m + n;
  if (r < 1) throw DomainError("rank must be positive");

  PowerOptions popt;
  popt.seed = opt.seed;
  const PowerResult warm = norm_power(A, pair.p, pair.q, popt);

  GramSolution best;
  best.U = Matrix::Zero(m, r);
  best.V = Matrix::Zero(n, r);
  best.U.col(0) = warm.y;
  best.V.col(0) = warm.x;
  best.value = detail::bilinear(A, best.U, best.V);
  best.warm_start_value = best.value;
  best.converged = true;
  best.trace = {best.value};

  for (std::size_t restart = 0; restart <= opt.restarts; ++restart) {
    Rng rng(opt.seed, 1000 + restart);
    Matrix V(n, r);
    for (Eigen::Index j = 0; j < n; ++j)
      for (Eigen::Index k = 0; k < r; ++k) V(j, k) = rng.normal();
    if (restart == 0) {
      V *= opt.warm_noise;
      V.col(0) += warm.x;
    }
    Matrix U = detail::best_rows(A * V, pair.q_star);
    V = detail::best_rows(A.transpose() * U, pair.p);
    GramSolution run;
    run.trace.push_back(detail::bilinear(A, U, V));
    std::size_t it = 0;
    for (; it < opt.max_iters; ++it) {
      U = detail::best_rows(A * V, pair.q_star);
      V = detail::best_rows(A.transpose() * U, pair.p);
      run.trace.push_back(detail::bilinear(A, U, V));
      const std::size_t len = run.trace.size();
      if (len > opt.window) {
        const double now = run.trace.back();
        const double then = run.trace[len - 1 - opt.window];
        if (std::abs(now - then) <= opt.tol * std::max(std::abs(now), 1e-300)) {
          run.converged = true;
          ++it;
          break;
        }
      }
    }
    run.U = std::move(U);
    run.V = std::move(V);
    run.value = run.trace.back();
    run.iterations = it;
    run.warm_start_value = best.warm_start_value;
    if (run.value > best.value) best = std::move(run);
  }
  return best;
}

struct DualOptions {
  std::size_t refine_iters = 400;
  double psd_tol = 1e-7;
  double gap_tol = 1e-6;
};

struct DualCertificate {
  Vector s;
  Vector t;
  double value = 0.0;
  double min_eig = 0.0;
  bool valid = false;
  std::size_t refine_iterations = 0;
};

/// The support functions of the diagonal constraint sets.
inline double xi_y(const Vector& s, const ExponentPair& pair) { return counting_norm(s, conjugate(pair.q_star / 2.0)); }
inline double xi_x(const Vector& t, const ExponentPair& pair) { return counting_norm(t, conjugate(pair.p / 2.0)); }

/// Smallest eigenvalue of [[D_s, -A], [-A^T, D_t]].
inline double dual_min_eig(const Matrix& A, const Vector& s, const Vector& t) {
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  Matrix M = Matrix::Zero(m + n, m + n);
  M.diagonal().head(m) = s;
  M.diagonal().tail(n) = t;
  M.topRightCorner(m, n) = -A;
  M.bottomLeftCorner(n, m) = -A.transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(M, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

namespace detail {

/// Gradient of log xi = log ||x||_r with respect to log x (x > 0).
inline Vector log_norm_gradient(const Vector& x, double r) {
  Vector g = Vector::Zero(x.size());
  if (std::isinf(r)) {
    Eigen::Index i = 0;
    x.maxCoeff(&i);
    g[i] = 1.0;
    return g;
  }
  const double mx = x.maxCoeff();
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(x[i] / mx, r);
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = std::pow(x[i] / mx, r) / s;
  return g;
}

struct DualPoint {
  double log_value = kInf;
  double sigma = 0.0;
  Vector left;
  Vector right;
};

/// For positive (s, t), the smallest kappa with (kappa s, kappa t) feasible
/// after the optimal rebalancing (lambda s, t / lambda) has value
/// sigma_max(D_s^{-1/2} A D_t^{-1/2}) sqrt(xi_Y(s) xi_X(t)).
inline DualPoint evaluate_dual(const Matrix& A, const Vector& s, const Vector& t, const ExponentPair& pair) {
  const Vector ds = s.cwiseSqrt().cwiseInverse();
  const Vector dt = t.cwiseSqrt().cwiseInverse();
  const Matrix B = ds.asDiagonal() * A * dt.asDiagonal();
  Eigen::JacobiSVD<Matrix> svd(B, Eigen::ComputeThinU | Eigen::ComputeThinV);
  DualPoint d;
  d.sigma = svd.singularValues()[0];
  d.left = svd.matrixU().col(0);
  d.right = svd.matrixV().col(0);
  d.log_value = std::log(d.sigma) + 0.5 * std::log(xi_y(s, pair)) + 0.5 * std::log(xi_x(t, pair));
  return d;
}

}  // namespace detail

/// Dual certificate for CP(A). The direction (s, t) is seeded from the
/// stationarity conditions A V = D_s U, A^T U = D_t V of a primal solution,
/// refined by gradient descent in log-coordinates, and finally placed on the
/// PSD boundary by exact rescaling. Validity is re-checked via the minimum
/// eigenvalue of the block matrix.
inline DualCertificate solve_dual(const Matrix& A, const ExponentPair& pair, const DualOptions& opt = {},
                                  const std::optional<GramSolution>& primal = std::nullopt,
                                  const CpOptions& cp_opt = {}) {
  check_matrix(A);
  const Eigen::Index m = A.rows();
  const Eigen::Index n = A.cols();
  const GramSolution sol = primal ? *primal : solve_cp(A, pair, cp_opt);

  // Zero rows/columns of A decouple from the PSD constraint: s_i = 0 there.
  std::vector<Eigen::Index> rows;
  std::vector<Eigen::Index> cols;
  for (Eigen::Index i = 0; i < m; ++i)
    if (A.row(i).cwiseAbs().maxCoeff() > 0.0) rows.push_back(i);
  for (Eigen::Index j = 0; j < n; ++j)
    if (A.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);

  DualCertificate cert;
  cert.s = Vector::Zero(m);
  cert.t = Vector::Zero(n);
  if (rows.empty()) {
    cert.value = 0.0;
    cert.min_eig = dual_min_eig(A, cert.s, cert.t);
    cert.valid = cert.min_eig >= -opt.psd_tol;
    return cert;
  }

  const auto mr = static_cast<Eigen::Index>(rows.size());
  const auto nc = static_cast<Eigen::Index>(cols.size());
  Matrix Ar(mr, nc);
  for (Eigen::Index i = 0; i < mr; ++i)
    for (Eigen::Index j = 0; j < nc; ++j) Ar(i, j) = A(rows[i], cols[j]);

  // Stationarity seed.
  const Matrix AV = A * sol.V;
  const Matrix AtU = A.transpose() * sol.U;
  Vector s(mr);
  Vector t(nc);
  for (Eigen::Index i = 0; i < mr; ++i) {
    const double un = sol.U.row(rows[i]).squaredNorm();
    s[i] = un > 0.0 ? AV.row(rows[i]).dot(sol.U.row(rows[i])) / un : 0.0;
  }
  for (Eigen::Index j = 0; j < nc; ++j) {
    const double vn = sol.V.row(cols[j]).squaredNorm();
    t[j] = vn > 0.0 ? AtU.row(cols[j]).dot(sol.V.row(cols[j])) / vn : 0.0;
  }
  auto floor_positive = [](Vector& x, const Vector& fallback) {
    const double mx = x.maxCoeff();
    const double fl = (mx > 0.0 ? mx : fallback.maxCoeff()) * 1e-6;
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (!(x[i] > fl)) x[i] = std::max(fl, mx > 0.0 ? fl : fallback[i]);
  };
  floor_positive(s, Ar.rowwise().norm());
  floor_positive(t, Ar.colwise().norm().transpose());

  // Gradient descent on log(value) over (log s, log t) with backtracking.
  const double ry = conjugate(pair.q_star / 2.0);
  const double rx = conjugate(pair.p / 2.0);
  detail::DualPoint cur = detail::evaluate_dual(Ar, s, t, pair);
  double step = 0.5;
  std::size_t it = 0;
  for (; it < opt.refine_iters && step > 1e-12; ++it) {
    const Vector gs = -0.5 * cur.left.cwiseAbs2() + 0.5 * detail::log_norm_gradient(s, ry);
    const Vector gt = -0.5 * cur.right.cwiseAbs2() + 0.5 * detail::log_norm_gradient(t, rx);
    const double gnorm2 = gs.squaredNorm() + gt.squaredNorm();
    if (gnorm2 < 1e-24) break;
    bool improved = false;
    while (step > 1e-12) {
      const Vector s2 = (s.array().log() - step * gs.array()).exp().matrix();
      const Vector t2 = (t.array().log() - step * gt.array()).exp().matrix();
      const detail::DualPoint cand = detail::evaluate_dual(Ar, s2, t2, pair);
      if (cand.log_value < cur.log_value - 1e-4 * step * gnorm2) {
        s = s2;
        t = t2;
        cur = cand;
        step *= 2.0;
        improved = true;
        break;
      }
      step *= 0.5;
    }
    if (!improved) break;
  }
  cert.refine_iterations = it;

  // Exact placement on the PSD boundary, with a relative margin against rounding.
  const double lambda = std::sqrt(xi_x(t, pair) / xi_y(s, pair));
  const double kappa = cur.sigma * (1.0 + 1e-12);
  for (Eigen::Index i = 0; i < mr; ++i) cert.s[rows[i]] = kappa * lambda * s[i];
  for (Eigen::Index j = 0; j < nc; ++j) cert.t[cols[j]] = kappa / lambda * t[j];
  cert.value = 0.5 * (xi_y(cert.s, pair) + xi_x(cert.t, pair));
  cert.min_eig = dual_min_eig(A, cert.s, cert.t);
  cert.valid = cert.min_eig >= -opt.psd_tol;
  return cert;
}

}  // namespace pqnorm
