#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace ssd {

/// Raised by dual (and plain) evaluations outside a function's domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Forward-mode dual number a + b*eps with eps^2 = 0.
struct Dual {
  double value = 0.0;
  double tangent = 0.0;

  constexpr Dual() = default;
  constexpr Dual(double v) : value(v) {}  // NOLINT: implicit lift of constants
  constexpr Dual(double v, double t) : value(v), tangent(t) {}

  Dual& operator+=(const Dual& o) {
    value += o.value;
    tangent += o.tangent;
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    value -= o.value;
    tangent -= o.tangent;
    return *this;
  }
  Dual& operator*=(const Dual& o) {
    tangent = tangent * o.value + value * o.tangent;
    value *= o.value;
    return *this;
  }
  Dual& operator/=(const Dual& o) {
    if (o.value == 0.0) throw DomainError("dual division by zero");
    tangent = (tangent * o.value - value * o.tangent) / (o.value * o.value);
    value /= o.value;
    return *this;
  }
};

inline Dual operator-(const Dual& a) { return {-a.value, -a.tangent}; }
inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }

inline bool operator<(const Dual& a, const Dual& b) { return a.value < b.value; }
inline bool operator>(const Dual& a, const Dual& b) { return a.value > b.value; }

inline Dual sin(const Dual& a) { return {std::sin(a.value), a.tangent * std::cos(a.value)}; }
inline Dual cos(const Dual& a) { return {std::cos(a.value), -a.tangent * std::sin(a.value)}; }
inline Dual exp(const Dual& a) {
  const double e = std::exp(a.value);
  return {e, a.tangent * e};
}
inline Dual log(const Dual& a) {
  if (!(a.value > 0.0)) throw DomainError("dual log of non-positive value");
  return {std::log(a.value), a.tangent / a.value};
}
inline Dual sqrt(const Dual& a) {
  if (a.value < 0.0) throw DomainError("dual sqrt of negative value");
  const double s = std::sqrt(a.value);
  if (s == 0.0) throw DomainError("dual sqrt not differentiable at 0");
  return {s, a.tangent / (2.0 * s)};
}
/// a^p for a real exponent; integer exponents are allowed at a <= 0.
inline Dual pow(const Dual& a, double p) {
  if (p == 0.0) return {1.0, 0.0};
  const bool integral = std::floor(p) == p;
  if (!integral && a.value <= 0.0) throw DomainError("dual pow of non-positive base with fractional exponent");
  return {std::pow(a.value, p), a.tangent * p * std::pow(a.value, p - 1.0)};
}
/// Smooth surrogate of |a|: sqrt(a^2 + mu^2) - mu.
inline Dual abs_smooth(const Dual& a, double mu = 1e-8) {
  const double s = std::sqrt(a.value * a.value + mu * mu);
  return {s - mu, a.tangent * a.value / s};
}

// Plain overloads so templated objectives can call the same names.
inline double pow(double a, double p) { return std::pow(a, p); }
inline double abs_smooth(double a, double mu = 1e-8) { return std::sqrt(a * a + mu * mu) - mu; }

/// Returns p^T grad f(x) from a single dual evaluation of f.
template <class F>
double directional_derivative(F&& f, std::span<const double> x, std::span<const double> p) {
  if (x.size() != p.size()) throw std::invalid_argument("directional_derivative: dim(x) != dim(p)");
  std::vector<Dual> seeded(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) seeded[i] = Dual{x[i], p[i]};
  const Dual out = f(std::span<const Dual>(seeded));
  return out.tangent;
}

}  // namespace ssd
