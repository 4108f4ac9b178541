#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "pqnorm/common.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Validates the dense problem input: m, n >= 1 and finite entries.
inline void check_matrix(const Matrix& A) {
  if (A.rows() < 1 || A.cols() < 1) throw DomainError("matrix must have at least one row and column");
  if (!A.allFinite()) throw DomainError("matrix entries must be finite");
}

/// Counting p-norm (sum |x_i|^p)^{1/p}; p = inf gives max |x_i|.
inline double counting_norm(const Vector& x, double p) {
  if (!(p >= 1.0)) throw DomainError("norm exponent must be >= 1");
  if (x.size() == 0) return 0.0;
  if (std::isinf(p)) return x.cwiseAbs().maxCoeff();
  if (p == 1.0) return x.cwiseAbs().sum();
  if (p == 2.0) return x.norm();
  // Scale by the largest entry so large p does not overflow.
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x[i]) / m, p);
  return m * std::pow(s, 1.0 / p);
}

/// Expectation p-norm (mean |x_i|^p)^{1/p} = counting norm * n^{-1/p}.
inline double expectation_norm(const Vector& x, double p) {
  if (std::isinf(p)) return counting_norm(x, p);
  return counting_norm(x, p) * std::pow(static_cast<double>(x.size()), -1.0 / p);
}

/// Hoelder dual map Psi_r(x) = sgn(x) |x|^{r-1}, componentwise, r >= 1 finite.
/// <Psi_r(x), x> = ||x||_r^r and ||Psi_r(x)||_{r*} = ||x||_r^{r-1}.
inline Vector holder_dual(const Vector& x, double r) {
  if (!(r >= 1.0) || std::isinf(r)) throw DomainError("holder_dual requires finite r >= 1");
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) y[i] = signed_power(x[i], r - 1.0);
  return y;
}

/// A maximiser of <y, z> over the unit l_r ball (r in [1, inf]).
/// Returns the zero vector for z = 0.
inline Vector unit_ball_maximizer(const Vector& z, double r) {
  if (!(r >= 1.0)) throw DomainError("norm exponent must be >= 1");
  Vector y = Vector::Zero(z.size());
  if (z.size() == 0 || z.cwiseAbs().maxCoeff() == 0.0) return y;
  if (r == 1.0) {
    Eigen::Index i = 0;
    z.cwiseAbs().maxCoeff(&i);
    y[i] = z[i] > 0.0 ? 1.0 : -1.0;
    return y;
  }
  if (std::isinf(r)) {
    for (Eigen::Index i = 0; i < z.size(); ++i) y[i] = signed_power(z[i], 0.0);
    return y;
  }
  // y = Psi_{r*}(z) normalised; the r* - 1 power is computed on z / max|z|.
  const double rs = conjugate(r);
  const double m = z.cwiseAbs().maxCoeff();
  y = holder_dual(z / m, rs);
  return y / counting_norm(y, r);
}

}  // namespace pqnorm
