#pragma once

// Special functions behind the rounding analysis: Gamma, Gaussian absolute
// moments, and the normalised correlation function
//
//   f_{a,b}(rho) = E[sgn(g1)|g1|^a sgn(g2)|g2|^b] / (gamma_{a+1}^{a+1} gamma_{b+1}^{b+1})
//                = rho * 2F1((1-a)/2, (1-b)/2; 3/2; rho^2)
//
// for rho-correlated standard Gaussians (g1, g2).

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <string>
#include <vector>

#include "pqnorm/common.hpp"
#include "pqnorm/rng.hpp"

namespace pqnorm {

/// Gamma function for x > 0 (Lanczos, g = 7, nine terms; ~15 digits).
inline double gamma_fn(double x) {
  if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("gamma_fn requires finite x > 0");
  if (x < 0.5) {
    // Reflection keeps the Lanczos sum in its accurate range.
    return kPi / (std::sin(kPi * x) * gamma_fn(1.0 - x));
  }
  static constexpr std::array<double, 9> kLanczos = {
      0.99999999999980993,     676.5203681218851,     -1259.1392167224028,
      771.32342877765313,      -176.61502916214059,   12.507343278686905,
      -0.13857109526572012,    9.9843695780195716e-6, 1.5056327351493116e-7};
  constexpr double g = 7.0;
  const double z = x - 1.0;
  double sum = kLanczos[0];
  for (std::size_t i = 1; i < kLanczos.size(); ++i) sum += kLanczos[i] / (z + static_cast<double>(i));
  const double t = z + g + 0.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * sum;
}

/// E|g|^r for a standard Gaussian g, i.e. gamma_r^r.
inline double gaussian_abs_moment(double r) {
  if (!(r >= 0.0)) throw DomainError("gaussian_abs_moment requires r >= 0");
  if (r == 0.0) return 1.0;
  return std::pow(2.0, r / 2.0) * gamma_fn((1.0 + r) / 2.0) / std::sqrt(kPi);
}

/// gamma_r = (E|g|^r)^{1/r}; gamma_0 := 1 by continuity.
inline double gaussian_moment(double r) {
  if (!(r >= 0.0)) throw DomainError("gaussian_moment requires r >= 0");
  if (r == 0.0) return 1.0;
  if (std::isinf(r)) throw DomainError("gaussian_moment requires finite r");
  return std::pow(gaussian_abs_moment(r), 1.0 / r);
}

/// Norm parameters 1 <= q <= 2 <= p <= inf together with the quantities the
/// rounding analysis is phrased in: a = p* - 1, b = q - 1 and gamma_{p*}, gamma_q.
struct ExponentPair {
  double p = kInf;
  double q = 1.0;
  double p_star = 1.0;
  double q_star = kInf;
  double a = 0.0;
  double b = 0.0;
  double gamma_pstar = 0.0;
  double gamma_q = 0.0;

  static ExponentPair from_pq(double p, double q) {
    if (!(p >= 2.0)) throw DomainError("ExponentPair requires p in [2, inf]");
    if (!(q >= 1.0 && q <= 2.0)) throw DomainError("ExponentPair requires q in [1, 2]");
    ExponentPair e;
    e.p = p;
    e.q = q;
    e.p_star = conjugate(p);
    e.q_star = conjugate(q);
    e.a = e.p_star - 1.0;
    e.b = q - 1.0;
    e.gamma_pstar = gaussian_moment(e.p_star);
    e.gamma_q = gaussian_moment(q);
    return e;
  }

  /// Inverse parametrisation: p* = 1 + a, q = 1 + b.
  static ExponentPair from_ab(double a, double b) {
    if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
      throw DomainError("ExponentPair requires a, b in [0, 1]");
    const double p = a == 0.0 ? kInf : conjugate(1.0 + a);
    ExponentPair e = from_pq(p, 1.0 + b);
    // Keep a, b bit-exact rather than round-tripping through p.
    e.a = a;
    e.p_star = 1.0 + a;
    e.gamma_pstar = gaussian_moment(e.p_star);
    return e;
  }

  /// gamma_{p*}^{p*} * gamma_q^q: the first Hermite product that turns the
  /// normalised correlation f_{a,b} back into the raw Gaussian expectation.
  double correlation_scale() const { return gaussian_abs_moment(p_star) * gaussian_abs_moment(q); }
};

/// Truncated odd power series: coeffs[k] multiplies rho^{2k+1}.
struct OddSeries {
  std::vector<double> coeffs;

  OddSeries() = default;
  explicit OddSeries(std::vector<double> c) : coeffs(std::move(c)) {}

  /// K: the maximal odd degree kept is 2K+1.
  std::size_t truncation() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }

  /// Horner in rho^2. Works for real and complex arguments.
  template <typename T>
  T eval(T x) const {
    const T x2 = x * x;
    T acc{0};
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x2 + T(*it);
    return acc * x;
  }

  /// coeffs[K] |x|^{2K+1} / (1 - x^2): geometric estimate of the dropped tail.
  double remainder_estimate(double x) const {
    if (coeffs.empty()) return 0.0;
    const double ax = std::abs(x);
    if (ax >= 1.0) return kInf;
    const double K = static_cast<double>(truncation());
    return std::abs(coeffs.back()) * std::pow(ax, 2.0 * K + 1.0) / (1.0 - ax * ax);
  }
};

inline constexpr std::size_t kDefaultTruncation = 150;

namespace detail {
inline void check_unit_interval(double a, double b) {
  if (!(a >= 0.0 && a <= 1.0) || !(b >= 0.0 && b <= 1.0))
    throw DomainError("a and b must lie in [0, 1]");
}
}  // namespace detail

/// Coefficient of rho^{2k+1} in f_{a,b}: ((1-a)/2)_k ((1-b)/2)_k / ((3/2)_k k!).
inline double f_coefficient(double a, double b, std::size_t k) {
  detail::check_unit_interval(a, b);
  const double alpha = (1.0 - a) / 2.0;
  const double beta = (1.0 - b) / 2.0;
  double c = 1.0;
  for (std::size_t j = 0; j < k; ++j) {
    const double jd = static_cast<double>(j);
    c *= (alpha + jd) * (beta + jd) / ((1.5 + jd) * (jd + 1.0));
  }
  return c;
}

inline OddSeries f_series(double a, double b, std::size_t K) {
  detail::check_unit_interval(a, b);
  if (K < 1) throw DomainError("f_series requires K >= 1");
  const double alpha = (1.0 - a) / 2.0;
  const double beta = (1.0 - b) / 2.0;
  std::vector<double> c(K + 1);
  c[0] = 1.0;
  for (std::size_t j = 0; j < K; ++j) {
    const double jd = static_cast<double>(j);
    c[j + 1] = c[j] * (alpha + jd) * (beta + jd) / ((1.5 + jd) * (jd + 1.0));
  }
  return OddSeries(std::move(c));
}

inline OddSeries f_series(const ExponentPair& pair, std::size_t K) { return f_series(pair.a, pair.b, K); }

/// f_{a,b}(1) by Gauss's summation theorem (c - a - b = (1+a+b)/2 > 0).
inline double f_at_one(double a, double b) {
  detail::check_unit_interval(a, b);
  return gamma_fn(1.5) * gamma_fn((1.0 + a + b) / 2.0) / (gamma_fn(1.0 + a / 2.0) * gamma_fn(1.0 + b / 2.0));
}

struct FEvaluation {
  double value = 0.0;
  double partial_sum = 0.0;
  double remainder_estimate = 0.0;
  /// |rho| >= 0.999: the truncated series converges slowly there.
  bool slow_convergence = false;
};

/// Evaluates f_{a,b}(rho) from K+1 Taylor coefficients. At |rho| = 1 the
/// series limit is returned exactly (Gauss summation); `partial_sum` still
/// holds the truncated value.
inline FEvaluation f_eval_detailed(double a, double b, double rho, std::size_t K = kDefaultTruncation) {
  if (!(std::abs(rho) <= 1.0)) throw DomainError("f_eval requires |rho| <= 1");
  const OddSeries s = f_series(a, b, K);
  FEvaluation out;
  out.partial_sum = s.eval(rho);
  out.value = out.partial_sum;
  out.slow_convergence = std::abs(rho) >= 0.999;
  if (std::abs(rho) == 1.0) {
    out.value = std::copysign(f_at_one(a, b), rho);
    out.remainder_estimate = std::abs(out.value - out.partial_sum);
  } else {
    out.remainder_estimate = s.remainder_estimate(rho);
  }
  return out;
}

inline double f_eval(double a, double b, double rho, std::size_t K = kDefaultTruncation) {
  return f_eval_detailed(a, b, rho, K).value;
}

inline double f_eval(const ExponentPair& pair, double rho, std::size_t K = kDefaultTruncation) {
  return f_eval(pair.a, pair.b, rho, K);
}

/// sgn(x)|x|^e with 0^0 := 0 so that e = 0 yields the sign function.
inline double signed_power(double x, double e) {
  if (x == 0.0) return 0.0;
  if (e == 0.0) return x > 0.0 ? 1.0 : -1.0;
  if (e == 1.0) return x;
  return std::copysign(std::pow(std::abs(x), e), x);
}

struct CorrelationSample {
  double a = 0.0;
  double b = 0.0;
  double rho = 0.0;
  std::size_t samples = 0;
  double mean = 0.0;
  double std_error = 0.0;
  /// gamma_{a+1}^{a+1} gamma_{b+1}^{b+1} f_{a,b}(rho)
  double expected = 0.0;

  double z_score() const {
    if (std_error == 0.0) return mean == expected ? 0.0 : kInf;
    return (mean - expected) / std_error;
  }
};

/// Monte-Carlo estimate of E[sgn(g1)|g1|^a sgn(g2)|g2|^b] with
/// g1 = rho g2 + sqrt(1 - rho^2) g3.
inline CorrelationSample sample_noise_correlation(double a, double b, double rho, std::size_t samples, Rng& rng) {
  detail::check_unit_interval(a, b);
  if (!(std::abs(rho) <= 1.0)) throw DomainError("rho must lie in [-1, 1]");
  if (samples < 2) throw DomainError("need at least two samples");
  const double tail = std::sqrt(1.0 - rho * rho);
  // Welford accumulation keeps the variance estimate stable at 1e6 samples.
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double g2 = rng.normal();
    const double g3 = rng.normal();
    const double g1 = rho * g2 + tail * g3;
    const double x = signed_power(g1, a) * signed_power(g2, b);
    const double delta = x - mean;
    mean += delta / static_cast<double>(i + 1);
    m2 += delta * (x - mean);
  }
  CorrelationSample out;
  out.a = a;
  out.b = b;
  out.rho = rho;
  out.samples = samples;
  out.mean = mean;
  out.std_error = std::sqrt(m2 / static_cast<double>(samples - 1) / static_cast<double>(samples));
  out.expected = gaussian_abs_moment(a + 1.0) * gaussian_abs_moment(b + 1.0) * f_eval(a, b, rho);
  return out;
}

}  // namespace pqnorm
