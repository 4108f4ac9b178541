#pragma once

// Generalised Krivine rounding: transform a CP(A) solution so that Gaussian
// Hoelder-dual rounding reproduces c_{a,b} U V^T in expectation, then round.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <vector>

#include "pqnorm/common.hpp"
#include "pqnorm/inversion.hpp"
#include "pqnorm/norms.hpp"
#include "pqnorm/relaxation.hpp"
#include "pqnorm/rng.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

/// M = [[h(c UhUh^T), finv(c UhVh^T)], [finv(c VhUh^T), h(c VhVh^T)]] with
/// series applied entrywise to the Gram of the normalised rows Uh, Vh.
struct KrivineGram {
  Matrix M;
  double c = 0.0;
  Eigen::Index m = 0;
  Eigen::Index n = 0;
  Vector u_norms;
  Vector v_norms;
  double a = 0.0;
  double b = 0.0;
  double min_eig = 0.0;
  bool psd_ok = true;
};

namespace detail {
inline Matrix normalized_rows(const Matrix& X, Vector& norms) {
  norms = X.rowwise().norm();
  Matrix Xh = Matrix::Zero(X.rows(), X.cols());
  for (Eigen::Index i = 0; i < X.rows(); ++i)
    if (norms[i] > 0.0) Xh.row(i) = X.row(i) / norms[i];
  return Xh;
}
}  // namespace detail

inline KrivineGram build_krivine_gram(const GramSolution& sol, const ExponentPair& pair,
                                      std::size_t K = kDefaultTruncation, double psd_tol = 1e-8) {
  if (sol.U.cols() != sol.V.cols()) throw DomainError("U and V must share their column dimension");
  KrivineGram kg;
  kg.m = sol.U.rows();
  kg.n = sol.V.rows();
  kg.a = pair.a;
  kg.b = pair.b;
  const OddSeries finv = invert_odd_series(f_series(pair, K));
  const OddSeries h = abs_series(finv);
  kg.c = solve_unit_level(h, 1e-12);

  Matrix W(kg.m + kg.n, sol.U.cols());
  W.topRows(kg.m) = detail::normalized_rows(sol.U, kg.u_norms);
  W.bottomRows(kg.n) = detail::normalized_rows(sol.V, kg.v_norms);
  const Matrix G = W * W.transpose();
  const Eigen::Index N = kg.m + kg.n;
  kg.M.resize(N, N);
  for (Eigen::Index i = 0; i < N; ++i) {
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double x = std::clamp(kg.c * G(i, j), -1.0, 1.0);
      const bool cross = (i < kg.m) != (j < kg.m);
      const double v = cross ? finv.eval(x) : h.eval(x);
      kg.M(i, j) = v;
      kg.M(j, i) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(kg.M, Eigen::EigenvaluesOnly);
  kg.min_eig = es.eigenvalues().minCoeff();
  kg.psd_ok = kg.min_eig >= -psd_tol;
  return kg;
}

/// Finite-dimensional realisation of phi(U), psi(V).
struct GramRows {
  Matrix phi;  // m x (m+n)
  Matrix psi;  // n x (m+n)
  double clipped_mass = 0.0;
  double reconstruction_error = 0.0;
  /// Set when a = 0 or b = 0 and the corresponding rows are not unit length:
  /// the row rescaling exponent 1/a or 1/b is undefined there and rows are
  /// kept unit-length instead (sign rounding ignores the row scale).
  bool degenerate_scaling = false;
};

/// Factorises M = R R^T (negative eigenvalues clipped) and rescales rows by
/// ||u_i||^{1/b} and ||v_j||^{1/a}, so that Psi_q / Psi_{p*} of the Gaussian
/// projections carry factors ||u_i|| and ||v_j||.
inline GramRows gram_rows(const KrivineGram& kg, double indefinite_tol = 1e-4) {
  const Matrix& M = kg.M;
  if (!M.isApprox(M.transpose(), 1e-12)) throw DomainError("Krivine Gram matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  const Vector& ev = es.eigenvalues();
  if (ev.minCoeff() < -indefinite_tol) {
    std::ostringstream msg;
    msg << "minimum eigenvalue " << ev.minCoeff();
    throw NumericError("Krivine Gram matrix is strongly indefinite", msg.str());
  }
  GramRows out;
  Vector root(ev.size());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < 0.0) out.clipped_mass += -ev[i];
    root[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  const Matrix R = es.eigenvectors() * root.asDiagonal();
  out.phi = R.topRows(kg.m);
  out.psi = R.bottomRows(kg.n);
  out.reconstruction_error = (out.phi * out.psi.transpose() - M.topRightCorner(kg.m, kg.n)).cwiseAbs().maxCoeff();

  auto scale = [&](Matrix& rows, const Vector& norms, double e) {
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      if (norms[i] == 0.0) {
        rows.row(i).setZero();
      } else if (e == 0.0) {
        if (std::abs(norms[i] - 1.0) > 1e-6) out.degenerate_scaling = true;
      } else {
        rows.row(i) *= std::pow(norms[i], 1.0 / e);
      }
    }
  };
  scale(out.phi, kg.u_norms, kg.b);
  scale(out.psi, kg.v_norms, kg.a);
  return out;
}

struct RoundedPair {
  Vector y;  // ||y||_{q*} = 1
  Vector x;  // ||x||_p = 1
  double value = 0.0;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
};

/// Raw Hoelder-dual images of one Gaussian draw, before normalisation.
struct HolderSample {
  Vector y_raw;             // Psi_q(phi g)
  Vector x_raw;             // Psi_{p*}(psi g)
  double y_denominator = 0; // ||phi g||_q^b
  double x_denominator = 0; // ||psi g||_{p*}^a
};

inline HolderSample holder_sample(const GramRows& rows, const ExponentPair& pair, const Vector& g) {
  const Vector zy = rows.phi * g;
  const Vector zx = rows.psi * g;
  HolderSample s;
  s.y_raw = holder_dual(zy, pair.q);
  s.x_raw = holder_dual(zx, pair.p_star);
  s.y_denominator = std::pow(counting_norm(zy, pair.q), pair.b);
  s.x_denominator = std::pow(counting_norm(zx, pair.p_star), pair.a);
  return s;
}

inline Vector gaussian_vector(Eigen::Index d, Rng& rng) {
  Vector g(d);
  for (Eigen::Index i = 0; i < d; ++i) g[i] = rng.normal();
  return g;
}

/// One Gaussian Hoelder-dual rounding: y = Psi_q(phi g)/||phi g||_q^b,
/// x = Psi_{p*}(psi g)/||psi g||_{p*}^a.
inline RoundedPair round_once(const GramRows& rows, const Matrix& A, const ExponentPair& pair, Rng& rng) {
  if (rows.phi.rows() != A.rows() || rows.psi.rows() != A.cols())
    throw DomainError("Gram rows do not match the matrix shape");
  const Eigen::Index d = rows.phi.cols();
  for (int attempt = 0; attempt < 100; ++attempt) {
    const HolderSample s = holder_sample(rows, pair, gaussian_vector(d, rng));
    const double ny = counting_norm(s.y_raw, pair.q_star);
    const double nx = counting_norm(s.x_raw, pair.p);
    if (ny == 0.0 || nx == 0.0 || s.y_denominator == 0.0 || s.x_denominator == 0.0) continue;
    RoundedPair out;
    // The denominators already normalise analytically; dividing by the
    // measured norm as well removes the last bits of rounding error.
    out.y = s.y_raw / s.y_denominator;
    out.x = s.x_raw / s.x_denominator;
    out.y /= counting_norm(out.y, pair.q_star);
    out.x /= counting_norm(out.x, pair.p);
    out.value = out.y.dot(A * out.x);
    return out;
  }
  throw NumericError("rounding produced zero projections repeatedly", "Gram rows may be all zero");
}

struct PreparedRounding {
  KrivineGram gram;
  GramRows rows;
};

inline PreparedRounding prepare_rounding(const GramSolution& sol, const ExponentPair& pair,
                                         std::size_t K = kDefaultTruncation) {
  PreparedRounding pr;
  pr.gram = build_krivine_gram(sol, pair, K);
  pr.rows = gram_rows(pr.gram);
  return pr;
}

/// Best of `trials` independent roundings (trial t uses stream t of `seed`).
/// y is negated when that makes <y, Ax> positive; feasibility is unchanged.
inline RoundedPair round_best(const Matrix& A, const PreparedRounding& pr, const ExponentPair& pair,
                              std::size_t trials, std::uint64_t seed) {
  if (trials < 1) throw DomainError("round_best requires trials >= 1");
  RoundedPair best;
  best.value = -kInf;
  for (std::size_t t = 0; t < trials; ++t) {
    Rng rng(seed, t);
    RoundedPair r = round_once(pr.rows, A, pair, rng);
    if (r.value < 0.0) {
      r.y = -r.y;
      r.value = -r.value;
    }
    r.trial = t;
    r.seed = seed;
    if (r.value > best.value) best = std::move(r);
  }
  return best;
}

inline RoundedPair round_best(const Matrix& A, const GramSolution& sol, const ExponentPair& pair,
                              std::size_t trials, std::uint64_t seed, std::size_t K = kDefaultTruncation) {
  return round_best(A, prepare_rounding(sol, pair, K), pair, trials, seed);
}

}  // namespace pqnorm
