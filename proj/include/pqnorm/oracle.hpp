#pragma once

// Ground truth and structural checks for p->q norms: a Hoelder-dual power
// method (always a valid lower bound), an exhaustive angular grid for
// n <= 3 columns, the transpose duality, Kronecker multiplicativity in the
// hypercontractive regime, and the Gaussian l_2 -> l_q embedding experiment.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pqnorm/common.hpp"
#include "pqnorm/norms.hpp"
#include "pqnorm/rng.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

struct PowerResult {
  double value = 0.0;
  Vector x;  // ||x||_p = 1, value = ||Ax||_q
  Vector y;  // ||y||_{q*} = 1, <y, Ax> = value
  std::size_t best_start = 0;
  /// Objective after each iteration of the winning start.
  std::vector<double> trace;
};

struct PowerOptions {
  std::size_t starts = 20;
  std::uint64_t seed = 0;
  std::size_t max_iters = 2000;
  double tol = 1e-13;
};

/// Runs the alternating maximisation of <y, Ax> over the l_{q*} and l_p unit
/// balls from a single start. Each half-step is an exact block maximiser, so
/// the objective never decreases.
inline PowerResult power_from(const Matrix& A, double p, double q, Vector x, const PowerOptions& opt) {
  const double qs = conjugate(q);
  PowerResult r;
  const double nx = counting_norm(x, p);
  if (nx == 0.0) {
    x = Vector::Ones(A.cols());
  }
  x /= counting_norm(x, p);
  double value = counting_norm(A * x, q);
  r.trace.push_back(value);
  for (std::size_t it = 0; it < opt.max_iters; ++it) {
    const Vector y = unit_ball_maximizer(A * x, qs);
    Vector xn = unit_ball_maximizer(A.transpose() * y, p);
    if (xn.cwiseAbs().maxCoeff() == 0.0) break;
    const double vn = counting_norm(A * xn, q);
    if (vn < value) break;  // rounding noise at a fixed point
    const bool done = vn - value <= opt.tol * std::max(1.0, vn);
    x = std::move(xn);
    value = vn;
    r.trace.push_back(value);
    if (done) break;
  }
  r.value = value;
  r.x = x;
  r.y = unit_ball_maximizer(A * x, qs);
  return r;
}

/// Lower bound on ||A||_{p->q} (counting norms) from several starts: the
/// all-ones vector, the top right singular vector, then Gaussian starts.
inline PowerResult norm_power(const Matrix& A, double p, double q, const PowerOptions& opt = {}) {
  check_matrix(A);
  if (!(p >= 1.0) || !(q >= 1.0)) throw DomainError("norm exponents must be >= 1");
  if (opt.starts < 1) throw DomainError("norm_power requires at least one start");
  const Eigen::Index n = A.cols();
  PowerResult best;
  best.value = -1.0;
  Eigen::JacobiSVD<Matrix> svd(A, Eigen::ComputeThinV);
  for (std::size_t s = 0; s < opt.starts; ++s) {
    Vector x0;
    if (s == 0) {
      x0 = Vector::Ones(n);
    } else if (s == 1) {
      x0 = svd.matrixV().col(0);
    } else {
      Rng rng(opt.seed, s);
      x0.resize(n);
      for (Eigen::Index j = 0; j < n; ++j) x0[j] = rng.normal();
    }
    PowerResult r = power_from(A, p, q, x0, opt);
    if (r.value > best.value) {
      best = std::move(r);
      best.best_start = s;
    }
  }
  return best;
}

/// Max of ||Ad||_q / ||d||_p over an angular grid of directions (n <= 3),
/// plus the cube vertices when p = inf. A lower bound that converges to the
/// norm as resolution grows.
inline double norm_grid(const Matrix& A, double p, double q, std::size_t resolution) {
  check_matrix(A);
  if (A.cols() > 3) throw DomainError("norm_grid supports at most three columns");
  if (resolution < 1) throw DomainError("resolution must be positive");
  double best = 0.0;
  auto consider = [&](const Vector& d) {
    const double dn = counting_norm(d, p);
    if (dn > 0.0) best = std::max(best, counting_norm(A * d, q) / dn);
  };
  const Eigen::Index n = A.cols();
  const double res = static_cast<double>(resolution);
  if (n == 1) {
    consider(Vector::Ones(1));
  } else if (n == 2) {
    for (std::size_t k = 0; k < resolution; ++k) {
      const double th = kPi * static_cast<double>(k) / res;
      consider((Vector(2) << std::cos(th), std::sin(th)).finished());
    }
  } else {
    for (std::size_t k = 0; k < resolution; ++k) {
      const double th = kPi * static_cast<double>(k) / res;
      for (std::size_t l = 0; l <= resolution; ++l) {
        const double ph = kPi * static_cast<double>(l) / res;
        consider((Vector(3) << std::sin(ph) * std::cos(th), std::sin(ph) * std::sin(th), std::cos(ph)).finished());
      }
    }
  }
  if (std::isinf(p)) {
    for (std::uint32_t mask = 0; mask < (1u << (n - 1)); ++mask) {
      Vector d = Vector::Ones(n);
      for (Eigen::Index j = 1; j < n; ++j)
        if (mask & (1u << (j - 1))) d[j] = -1.0;
      consider(d);
    }
  }
  return best;
}

/// Best available lower bound: power method, tightened by the grid for n <= 3.
inline double norm_estimate(const Matrix& A, double p, double q, const PowerOptions& opt = {},
                            std::size_t grid_resolution = 720) {
  double v = norm_power(A, p, q, opt).value;
  if (A.cols() <= 3) v = std::max(v, norm_grid(A, p, q, grid_resolution));
  return v;
}

/// ||A||^{expectation}_{p->q} from the counting-norm value: the two differ by n^{1/p} m^{-1/q}.
inline double expectation_operator_norm(double counting_value, Eigen::Index m, Eigen::Index n, double p, double q) {
  const double np = std::isinf(p) ? 1.0 : std::pow(static_cast<double>(n), 1.0 / p);
  const double mq = std::isinf(q) ? 1.0 : std::pow(static_cast<double>(m), -1.0 / q);
  return counting_value * np * mq;
}

struct DualityReport {
  double p = 0.0;
  double q = 0.0;
  double forward = 0.0;   // ||A||_{p->q}
  double transpose = 0.0; // ||A^T||_{q*->p*}
  double difference = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// ||A||_{p->q} = ||A^T||_{q*->p*}, both sides by the power method.
inline DualityReport duality_check(const Matrix& A, double p, double q, const PowerOptions& opt = {},
                                   double rel_tol = 1e-4) {
  DualityReport r;
  r.p = p;
  r.q = q;
  r.forward = norm_power(A, p, q, opt).value;
  const Matrix At = A.transpose();
  r.transpose = norm_power(At, conjugate(q), conjugate(p), opt).value;
  r.difference = std::abs(r.forward - r.transpose);
  r.tolerance = rel_tol * std::max({r.forward, r.transpose, 1e-300});
  r.pass = r.difference <= r.tolerance;
  return r;
}

inline Matrix kronecker(const Matrix& A, const Matrix& B) {
  Matrix K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    for (Eigen::Index j = 0; j < A.cols(); ++j) K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

inline Vector kronecker(const Vector& x, const Vector& y) {
  Vector k(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) k.segment(i * y.size(), y.size()) = x[i] * y;
  return k;
}

struct KronReport {
  double p = 0.0;
  double q = 0.0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double norm_kron = 0.0;
  double product = 0.0;
  double relative_gap = 0.0;
  bool upper_ok = false;
  bool lower_ok = false;
  bool pass = false;
};

/// Checks ||A (x) B||_{p->q} = ||A||_{p->q} ||B||_{p->q} for p <= q.
/// "<=" is the hypercontractive multiplicativity; ">=" holds for every p, q
/// because x_A (x) x_B attains the product, so the check is an equality test.
inline KronReport kron_check(const Matrix& A, const Matrix& B, double p, double q, const PowerOptions& opt = {},
                             double rel_tol = 1e-3) {
  if (!(p <= q)) throw DomainError("kron_check requires p <= q");
  check_matrix(A);
  check_matrix(B);
  KronReport r;
  r.p = p;
  r.q = q;
  const PowerResult pa = norm_power(A, p, q, opt);
  const PowerResult pb = norm_power(B, p, q, opt);
  r.norm_a = A.cols() <= 3 ? std::max(pa.value, norm_grid(A, p, q, 2000)) : pa.value;
  r.norm_b = B.cols() <= 3 ? std::max(pb.value, norm_grid(B, p, q, 2000)) : pb.value;
  const Matrix K = kronecker(A, B);
  PowerResult pk = norm_power(K, p, q, opt);
  const PowerResult from_product = power_from(K, p, q, kronecker(pa.x, pb.x), opt);
  r.norm_kron = std::max(pk.value, from_product.value);
  r.product = r.norm_a * r.norm_b;
  const double scale = std::max(r.product, 1e-300);
  r.relative_gap = (r.norm_kron - r.product) / scale;
  r.upper_ok = r.norm_kron <= r.product * (1.0 + rel_tol);
  r.lower_ok = r.norm_kron >= r.product * (1.0 - rel_tol);
  r.pass = r.upper_ok && r.lower_ok;
  return r;
}

struct EmbeddingReport {
  std::size_t n = 0;
  std::size_t m = 0;
  double q = 0.0;
  std::size_t trials = 0;
  std::vector<double> ratios;  // random unit x
  double adversarial_max_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double max_deviation = 0.0;  // max |ratio - 1| incl. the adversarial x
  double rms_deviation = 0.0;  // over the random trials
};

/// Default row count 50 n^{q/2}, capped at 1e5.
inline std::size_t default_embedding_rows(std::size_t n, double q) {
  const double m = 50.0 * std::pow(static_cast<double>(n), q / 2.0);
  return static_cast<std::size_t>(std::min(1e5, std::ceil(m)));
}

/// For B with iid N(0,1) entries, ||Bx||_q should be (1 +- o(1)) m^{1/q} gamma_q
/// for every unit x. Reports ||Bx||_q / (m^{1/q} gamma_q) for random unit x and
/// for the maximiser found by the l_2 -> l_q power method.
inline EmbeddingReport embedding_experiment(std::size_t n, std::size_t m, double q, std::size_t trials,
                                            std::uint64_t seed) {
  if (n < 1 || m < 1 || trials < 1) throw DomainError("embedding_experiment requires n, m, trials >= 1");
  if (!(q >= 2.0) || std::isinf(q)) throw DomainError("embedding_experiment requires finite q >= 2");
  if (m > 100000) throw DomainError("embedding_experiment caps m at 1e5");
  Rng rng(seed, 0);
  Matrix B(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (Eigen::Index j = 0; j < B.cols(); ++j)
    for (Eigen::Index i = 0; i < B.rows(); ++i) B(i, j) = rng.normal();
  const double scale = std::pow(static_cast<double>(m), 1.0 / q) * gaussian_moment(q);
  EmbeddingReport r;
  r.n = n;
  r.m = m;
  r.q = q;
  r.trials = trials;
  Rng xr(seed, 1);
  double sq = 0.0;
  for (std::size_t t = 0; t < trials; ++t) {
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index j = 0; j < x.size(); ++j) x[j] = xr.normal();
    x.normalize();
    const double ratio = counting_norm(B * x, q) / scale;
    r.ratios.push_back(ratio);
    sq += (ratio - 1.0) * (ratio - 1.0);
  }
  PowerOptions opt;
  opt.starts = 5;
  opt.seed = seed ^ 0x5eedULL;
  r.adversarial_max_ratio = norm_power(B, 2.0, q, opt).value / scale;
  r.min_ratio = *std::min_element(r.ratios.begin(), r.ratios.end());
  r.max_ratio = std::max(*std::max_element(r.ratios.begin(), r.ratios.end()), r.adversarial_max_ratio);
  r.max_deviation = std::max(std::abs(r.max_ratio - 1.0), std::abs(r.min_ratio - 1.0));
  r.rms_deviation = std::sqrt(sq / static_cast<double>(trials));
  return r;
}

}  // namespace pqnorm
