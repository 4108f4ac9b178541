#pragma once

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace pqnorm {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.14159265358979323846264338327950288;

/// Thrown when an argument lies outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Thrown when a numerical procedure cannot deliver its postcondition
/// (no bracket, no self-consistent certificate, quadrature disagreement...).
/// `detail` carries a human-readable diagnostic.
class NumericError : public std::runtime_error {
 public:
  NumericError(const std::string& what, std::string detail = {})
      : std::runtime_error(what), detail_(std::move(detail)) {}
  const std::string& detail() const noexcept { return detail_; }

 private:
  std::string detail_;
};

/// Conjugate exponent r* with 1/r + 1/r* = 1 (1 <-> inf).
inline double conjugate(double r) {
  if (!(r >= 1.0)) throw DomainError("conjugate exponent requires r >= 1");
  if (r == 1.0) return kInf;
  if (std::isinf(r)) return 1.0;
  return r / (r - 1.0);
}

}  // namespace pqnorm
