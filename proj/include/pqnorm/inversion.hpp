#pragma once

// Compositional inversion of f_{a,b}, the absolute inverse series
// h = abs(f^{-1}), the rounding constant c_{a,b} = h^{-1}(1) and the
// machinery that certifies a lower bound on it.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pqnorm/common.hpp"
#include "pqnorm/quadrature.hpp"
#include "pqnorm/specfn.hpp"

namespace pqnorm {

/// Decay constant: |f^{-1}_k| <= kInverseDecayConstant / (k (1+eps)^k).
inline constexpr double kInverseDecayConstant = 6.1831;
/// Headline slack: h^{-1}(1) >= asinh(1) / (1 + eps0). Reported, never asserted.
inline constexpr double kHeadlineEpsilon0 = 0.00863;
inline constexpr std::size_t kDefaultDefectIndex = 31;

/// Formal inverse g of an odd series f with f.coeffs[0] == 1, so that
/// f(g(x)) = x + O(x^{2K+3}).
///
/// Writing g(x) = x G(x^2), the coefficient of x^{2k+1} in f(g(x)) is
///   g_k + sum_{j=1..k} f_j [y^{k-j}] G(y)^{2j+1},
/// and the powers of G only involve g_1..g_{k-1}. Powers are expanded with
/// the J.C.P. Miller recurrence, O(K^3) overall.
inline OddSeries invert_odd_series(const OddSeries& f) {
  if (f.coeffs.empty() || std::abs(f.coeffs[0] - 1.0) > 1e-12)
    throw DomainError("invert_odd_series requires leading coefficient 1");
  const std::size_t K = f.truncation();
  std::vector<double> g(K + 1, 0.0);
  g[0] = 1.0;
  // powers[j] holds the known prefix of G^{2j+1}.
  std::vector<std::vector<double>> powers(K + 1);
  for (std::size_t j = 1; j <= K; ++j) {
    powers[j].reserve(K - j + 1);
    powers[j].push_back(1.0);
  }
  for (std::size_t k = 1; k <= K; ++k) {
    double s = 0.0;
    for (std::size_t j = 1; j <= k; ++j) {
      if (f.coeffs[j] == 0.0) continue;
      const std::size_t m = k - j;
      auto& P = powers[j];
      const double n = static_cast<double>(2 * j + 1);
      while (P.size() <= m) {
        const std::size_t mm = P.size();
        double acc = 0.0;
        for (std::size_t i = 1; i <= mm; ++i)
          acc += ((n + 1.0) * static_cast<double>(i) - static_cast<double>(mm)) * g[i] * P[mm - i];
        P.push_back(acc / static_cast<double>(mm));
      }
      s += f.coeffs[j] * P[m];
    }
    g[k] = -s;
  }
  return OddSeries(std::move(g));
}

/// abs(s)(x) = sum |s_k| x^{2k+1}.
inline OddSeries abs_series(const OddSeries& s) {
  OddSeries out = s;
  for (double& c : out.coeffs) c = std::abs(c);
  return out;
}

/// h_{a,b} = abs(f_{a,b}^{-1}) truncated at K.
inline OddSeries h_series(double a, double b, std::size_t K = kDefaultTruncation) {
  return abs_series(invert_odd_series(f_series(a, b, K)));
}

/// c_{a,b} = h^{-1}(1) by bisection on [0, 1]; h is increasing there.
inline double solve_unit_level(const OddSeries& h, double tol) {
  if (!(tol > 0.0)) throw DomainError("tolerance must be positive");
  const double h1 = h.eval(1.0);
  if (!(h1 >= 1.0)) {
    std::ostringstream msg;
    msg << "h(1) = " << h1 << " < 1 at truncation K = " << h.truncation();
    throw NumericError("cannot bracket h^{-1}(1)", msg.str());
  }
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    if (h.eval(mid) < 1.0)
      lo = mid;
    else
      hi = mid;
  }
  const double residual = std::abs(h.eval(hi) - 1.0);
  if (residual > tol) {
    std::ostringstream msg;
    msg << "|h(c) - 1| = " << residual << " exceeds tol " << tol;
    throw NumericError("bisection did not reach tolerance", msg.str());
  }
  return hi;
}

inline double compute_c(double a, double b, std::size_t K = kDefaultTruncation, double tol = 1e-12) {
  return solve_unit_level(h_series(a, b, K), tol);
}

inline double compute_c(const ExponentPair& pair, std::size_t K = kDefaultTruncation, double tol = 1e-12) {
  return compute_c(pair.a, pair.b, K, tol);
}

inline double factorial(std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 2; i <= k; ++i) r *= static_cast<double>(i);
  return r;
}

/// Slack of the coefficient condition on f^{-1}_k (k odd):
///   k = 1 mod 4:  1/k! - f^{-1}_k   (>= 0 required)
///   k = 3 mod 4:  -f^{-1}_k         (>= 0 required)
inline double sign_condition_slack(std::size_t k, double coefficient) {
  return k % 4 == 1 ? 1.0 / factorial(k) - coefficient : -coefficient;
}

struct SignPatternEntry {
  std::size_t k = 0;
  std::string condition;  // "C1" (k = 1 mod 4) or "C2" (k = 3 mod 4)
  double worst_slack = kInf;
  double worst_a = 0.0;
  double worst_b = 0.0;
  bool pass = true;
};

struct SignPatternReport {
  std::size_t k_max = 0;
  double grid_step = 0.0;
  double margin = 0.0;
  std::size_t points_checked = 0;
  std::string method = "numeric grid with local refinement";
  std::vector<SignPatternEntry> entries;
  bool pass = true;
};

namespace detail {
inline std::vector<double> unit_grid(double step) {
  std::vector<double> pts;
  const auto n = static_cast<std::size_t>(std::llround(1.0 / step));
  for (std::size_t i = 0; i <= n; ++i) pts.push_back(std::min(1.0, static_cast<double>(i) * step));
  if (pts.back() < 1.0) pts.push_back(1.0);
  return pts;
}
}  // namespace detail

/// Checks the coefficient sign conditions for every odd k <= k_max on the
/// grid [0,1]^2 with spacing grid_step, then re-examines an 11x11 patch around
/// each k's worst grid point. Failures are data, not exceptions.
inline SignPatternReport verify_sign_pattern(std::size_t k_max, double grid_step, double margin = 1e-9) {
  if (k_max % 2 == 0) throw DomainError("k_max must be odd");
  if (!(grid_step > 0.0 && grid_step <= 0.5)) throw DomainError("grid_step must lie in (0, 0.5]");
  const std::size_t K = (k_max - 1) / 2;
  SignPatternReport rep;
  rep.k_max = k_max;
  rep.grid_step = grid_step;
  rep.margin = margin;
  for (std::size_t i = 0; i <= K; ++i) {
    SignPatternEntry e;
    e.k = 2 * i + 1;
    e.condition = e.k % 4 == 1 ? "C1" : "C2";
    rep.entries.push_back(e);
  }
  auto visit = [&](double a, double b) {
    const OddSeries g = invert_odd_series(f_series(a, b, std::max<std::size_t>(K, 1)));
    ++rep.points_checked;
    for (std::size_t i = 0; i <= K; ++i) {
      const double slack = sign_condition_slack(2 * i + 1, g.coeffs[i]);
      auto& e = rep.entries[i];
      if (slack < e.worst_slack) {
        e.worst_slack = slack;
        e.worst_a = a;
        e.worst_b = b;
      }
    }
  };
  const auto grid = detail::unit_grid(grid_step);
  for (double a : grid)
    for (double b : grid) visit(a, b);

  // Refinement around each coefficient's worst point.
  std::vector<std::pair<double, double>> centres;
  for (const auto& e : rep.entries) centres.emplace_back(e.worst_a, e.worst_b);
  std::sort(centres.begin(), centres.end());
  centres.erase(std::unique(centres.begin(), centres.end()), centres.end());
  for (auto [ca, cb] : centres) {
    for (int i = -5; i <= 5; ++i) {
      for (int j = -5; j <= 5; ++j) {
        if (i == 0 && j == 0) continue;
        const double a = std::clamp(ca + grid_step * i / 5.0, 0.0, 1.0);
        const double b = std::clamp(cb + grid_step * j / 5.0, 0.0, 1.0);
        visit(a, b);
      }
    }
  }
  for (auto& e : rep.entries) {
    e.pass = e.worst_slack >= -margin;
    rep.pass = rep.pass && e.pass;
  }
  return rep;
}

/// Sign conditions at a single (a, b) for all odd k < t.
inline bool sign_pattern_holds_at(double a, double b, std::size_t t, double margin = 1e-9) {
  if (t < 3) return true;
  const std::size_t K = std::max<std::size_t>((t - 3) / 2, 1);
  const OddSeries g = invert_odd_series(f_series(a, b, K));
  for (std::size_t i = 0; 2 * i + 1 < t; ++i)
    if (sign_condition_slack(2 * i + 1, g.coeffs[i]) < -margin) return false;
  return true;
}

/// Upper bound on sum_{odd k >= t} |f^{-1}_k| delta^k obtained from the
/// coefficient decay |f^{-1}_k| <= C / (k (1+eps)^k):
///   (C / t) r^t / (1 - r^2),  r = delta / (1 + eps).
inline double tail_bound(std::size_t t, double delta, double eps = 0.0) {
  if (t < 3 || t % 2 == 0) throw DomainError("tail_bound requires odd t >= 3");
  if (!(delta >= 0.0) || !(eps >= 0.0)) throw DomainError("tail_bound requires delta >= 0, eps >= 0");
  const double r = delta / (1.0 + eps);
  if (!(r < 1.0)) throw DomainError("tail_bound requires delta / (1 + eps) < 1");
  return kInverseDecayConstant / static_cast<double>(t) * std::pow(r, static_cast<double>(t)) / (1.0 - r * r);
}

struct CertifiedBound {
  /// Certified: h^{-1}_{a,b}(1) >= rho.
  double rho = 0.0;
  double delta = 0.0;
  double tail = 0.0;
  std::size_t t = kDefaultDefectIndex;
  bool sign_pattern_ok = false;
};

/// Lower bound on h^{-1}_{a,b}(1) from the defect argument: if the sign
/// conditions hold for odd k < t and rho = asinh(1 - 2 T(delta)) <= delta,
/// where T bounds the inverse tail from degree t on, then h(rho) <= 1.
/// rho(delta) decreases in delta, so the best certificate sits at the
/// smallest self-consistent delta; it is located on a 1e-3 grid and then
/// bisected.
inline CertifiedBound certified_hinv_lower_bound(double a, double b, std::size_t t = kDefaultDefectIndex,
                                                 double eps = 0.0) {
  detail::check_unit_interval(a, b);
  if (t < 3 || t % 2 == 0) throw DomainError("t must be odd and >= 3");
  CertifiedBound out;
  out.t = t;
  if (a == 1.0 || b == 1.0) {
    // f is the identity, so h is too and the tail vanishes.
    out.rho = 1.0;
    out.delta = 1.0;
    out.tail = 0.0;
    out.sign_pattern_ok = true;
    return out;
  }
  out.sign_pattern_ok = sign_pattern_holds_at(a, b, t);
  if (!out.sign_pattern_ok) {
    std::ostringstream msg;
    msg << "sign conditions fail below degree " << t << " at (a, b) = (" << a << ", " << b << ")";
    throw NumericError("no certificate: coefficient sign conditions violated", msg.str());
  }
  auto rho_of = [&](double delta) { return std::asinh(1.0 - 2.0 * tail_bound(t, delta, eps)); };
  double infeasible = 0.0;
  double feasible = -1.0;
  for (int i = 1; i <= 999; ++i) {
    const double delta = i * 1e-3;
    if (delta / (1.0 + eps) >= 1.0) break;
    if (rho_of(delta) <= delta) {
      feasible = delta;
      break;
    }
    infeasible = delta;
  }
  if (feasible < 0.0) {
    throw NumericError("no self-consistent delta found", "increase t or the verified sign-pattern range");
  }
  for (int it = 0; it < 80; ++it) {
    const double mid = 0.5 * (infeasible + feasible);
    if (mid == infeasible || mid == feasible) break;
    if (rho_of(mid) <= mid)
      feasible = mid;
    else
      infeasible = mid;
  }
  out.delta = feasible;
  out.tail = tail_bound(t, feasible, eps);
  out.rho = rho_of(feasible);
  if (!(out.rho > 0.0)) throw NumericError("certified bound is not positive", "tail bound too large");
  return out;
}

inline CertifiedBound certified_hinv_lower_bound(const ExponentPair& pair, std::size_t t = kDefaultDefectIndex,
                                                 double eps = 0.0) {
  return certified_hinv_lower_bound(pair.a, pair.b, t, eps);
}

/// f^{-1}_k = (2 / (pi k)) Im \int_{C+} f(z)^{-k} dz over the first-quadrant
/// quarter circle |z| = delta, by Gauss-Legendre in the arc angle. The
/// half-resolution rule serves as the convergence check.
inline double contour_coefficient(double a, double b, std::size_t k, double delta, std::size_t n_points = 512,
                                  std::size_t K = kDefaultTruncation) {
  if (k % 2 == 0) throw DomainError("contour_coefficient requires odd k");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("contour radius must lie in (0, 1)");
  if (n_points < 4) throw DomainError("need at least four quadrature points");
  const OddSeries f = f_series(a, b, K);
  const double kd = static_cast<double>(k);
  auto arc = [&](double theta) {
    const std::complex<double> z = std::polar(delta, theta);
    const std::complex<double> fz = f.eval(z);
    return std::pow(fz, -kd) * std::complex<double>(0.0, 1.0) * z;
  };
  auto value = [&](std::size_t n) {
    const auto I = integrate(gauss_legendre(n), 0.0, kPi / 2.0, arc);
    return 2.0 / (kPi * kd) * I.imag();
  };
  const double fine = value(n_points);
  const double coarse = value(n_points / 2);
  // Integrand magnitude ~ delta^{1-k}; cancellation makes that the error scale.
  const double scale = std::pow(delta, 1.0 - kd);
  const double residual = std::abs(fine - coarse);
  if (residual > 1e-11 * scale + 1e-13) {
    std::ostringstream msg;
    msg << "quadrature residual " << residual << " at n = " << n_points;
    throw NumericError("contour quadrature did not converge", msg.str());
  }
  return fine;
}

inline double contour_coefficient(const ExponentPair& pair, std::size_t k, double delta, std::size_t n_points = 512,
                                  std::size_t K = kDefaultTruncation) {
  return contour_coefficient(pair.a, pair.b, k, delta, n_points, K);
}

struct InverseReport {
  double p = kInf;
  double q = 1.0;
  double a = 0.0;
  double b = 0.0;
  double c_ab = 0.0;
  std::optional<double> hinv_lower_bound;
  /// 1 / (L gamma_{p*} gamma_q) with L = hinv_lower_bound when certified, c_ab otherwise.
  double ratio = 0.0;
  bool certified = false;
  std::size_t k_checked = 0;
  bool c1_c2_ok = false;
  double tail_bound_used = 0.0;
  double delta = 0.0;
  /// asinh(1)/(1 + eps0); informational only.
  double headline_lower_bound = std::asinh(1.0) / (1.0 + kHeadlineEpsilon0);
  std::string failure;
};

/// Approximation factor 1/(L gamma_{p*} gamma_q) of the rounding scheme.
/// Both L candidates are computed and carried in the report; `certified`
/// chooses which one defines `ratio`.
inline InverseReport approx_ratio(const ExponentPair& pair, bool certified, std::size_t K = kDefaultTruncation,
                                  std::size_t t = kDefaultDefectIndex) {
  InverseReport rep;
  rep.p = pair.p;
  rep.q = pair.q;
  rep.a = pair.a;
  rep.b = pair.b;
  rep.certified = certified;
  rep.c_ab = compute_c(pair, K);
  rep.k_checked = t - 2;
  try {
    const CertifiedBound cb = certified_hinv_lower_bound(pair, t);
    rep.hinv_lower_bound = cb.rho;
    rep.c1_c2_ok = cb.sign_pattern_ok;
    rep.tail_bound_used = cb.tail;
    rep.delta = cb.delta;
  } catch (const NumericError& e) {
    if (certified) throw;
    rep.failure = std::string(e.what()) + ": " + e.detail();
  }
  const double L = certified ? *rep.hinv_lower_bound : rep.c_ab;
  rep.ratio = 1.0 / (L * pair.gamma_pstar * pair.gamma_q);
  return rep;
}

}  // namespace pqnorm
