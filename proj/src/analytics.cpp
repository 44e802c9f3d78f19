#include "ssd/analytics.hpp"

#include <cmath>
#include <limits>

#include "ssd/dual.hpp"

namespace ssd {
namespace {

// Continued fraction for I_p(a,b), valid for p < (a+1)/(a+b+2).
double beta_continued_fraction(double p, double a, double b) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;

  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * p / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * p / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * p / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw DomainError("beta_cdf: continued fraction did not converge");
}

// p^a (1-p)^b / (a B(a,b)) times the continued fraction.
double beta_lower(double p, double a, double b) {
  const double log_front =
      std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(p) + b * std::log1p(-p);
  return std::exp(log_front) * beta_continued_fraction(p, a, b) / a;
}

}  // namespace

double beta_cdf(double p, double a, double b) {
  if (!(p >= 0.0 && p <= 1.0)) throw DomainError("beta_cdf: p must lie in [0, 1]");
  if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b))
    throw DomainError("beta_cdf: shape parameters must be positive");
  if (p == 0.0) return 0.0;
  if (p == 1.0) return 1.0;
  if (p < (a + 1.0) / (a + b + 2.0)) return beta_lower(p, a, b);
  return 1.0 - beta_lower(1.0 - p, b, a);
}

double embedding_probability(std::size_t d, std::size_t ell, double eps) {
  if (ell < 1 || ell > d) throw DomainError("embedding_probability: need 1 <= ell <= d");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("embedding_probability: eps must lie in (0, 1)");
  if (ell == d) return 1.0;
  const double dd = static_cast<double>(d);
  const double ll = static_cast<double>(ell);
  const double threshold = (1.0 - eps) * ll / dd;
  // upper tail of Beta(l/2, (d-l)/2) as the lower tail of the mirrored law
  return beta_cdf(1.0 - threshold, (dd - ll) / 2.0, ll / 2.0);
}

double proxy_variance(std::size_t k, double delta) {
  if (k < 1) throw DomainError("proxy_variance: k must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DomainError("proxy_variance: delta must lie in (0, 1)");
  const double kk = static_cast<double>(k);
  if (delta == 0.5) return kk / 4.0;
  const double gap = 1.0 - 2.0 * delta;
  return kk * gap / (2.0 * std::log1p(gap / delta));
}

double ssd_rate_factor(std::size_t d, std::size_t ell, double gamma, double lambda) {
  return 1.0 - static_cast<double>(ell) * gamma / (static_cast<double>(d) * lambda);
}

double gaussian_smoothing_rate_factor(std::size_t d, double gamma, double lambda) {
  return 1.0 - gamma / (8.0 * lambda * (static_cast<double>(d) + 4.0));
}

void TheoryParams::validate() const {
  if (ell < 1 || ell > d) throw DomainError("theory params: need 1 <= ell <= d");
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("theory params: eps must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= lambda) || !std::isfinite(lambda))
    throw DomainError("theory params: need 0 < gamma <= lambda");
  if (k < 1) throw DomainError("theory params: horizon k must be >= 1");
  if (t && !(*t > 0.0)) throw DomainError("theory params: t must be positive");
}

RateBounds expected_rate_bounds(const TheoryParams& params, double f0_err, double radius) {
  params.validate();
  if (!(f0_err >= 0.0)) throw DomainError("expected_rate_bounds: f0_err must be non-negative");
  if (!(radius >= 0.0)) throw DomainError("expected_rate_bounds: radius must be non-negative");

  const double dd = static_cast<double>(params.d);
  const double ll = static_cast<double>(params.ell);
  RateBounds out;
  out.omega = ssd_rate_factor(params.d, params.ell, params.gamma, params.lambda);
  for (std::size_t k = 0; k <= params.k; ++k) {
    const double kk = static_cast<double>(k);
    out.strongly_convex.push_back(k == 0 ? f0_err : std::pow(out.omega, kk) * f0_err);
    out.convex.push_back(k == 0 ? std::numeric_limits<double>::infinity()
                                : 2.0 * dd * params.lambda * radius * radius / (kk * ll));
    out.nonconvex.push_back(2.0 * dd * params.lambda * f0_err / ((kk + 1.0) * ll));
  }
  return out;
}

HighProbabilityBound high_prob_bound(const TheoryParams& params) {
  params.validate();
  HighProbabilityBound out;
  out.delta = embedding_probability(params.d, params.ell, params.eps);
  out.t = params.t.value_or(out.delta / 2.0);
  if (!(out.t > 0.0 && out.t <= out.delta)) throw DomainError("high_prob_bound: need 0 < t <= delta");

  const double contraction = 1.0 - (1.0 - params.eps) * static_cast<double>(params.ell) * params.gamma /
                                       (static_cast<double>(params.d) * params.lambda);
  out.rho = std::pow(contraction, out.delta - out.t);

  out.sigma_sq.push_back(0.0);
  out.tail.push_back(1.0);
  for (std::size_t k = 1; k <= params.k; ++k) {
    // delta == 1: Binomial(k, 1) is deterministic, sigma_k^2 -> 0 and the tail vanishes
    const double s2 = out.delta >= 1.0 ? 0.0 : proxy_variance(k, out.delta);
    const double kt = static_cast<double>(k) * out.t;
    out.sigma_sq.push_back(s2);
    out.tail.push_back(s2 == 0.0 ? 0.0 : std::exp(-(kt * kt) / (2.0 * s2)));
  }
  return out;
}

std::vector<EmbeddingGridCell> embedding_grid(double eps, std::span<const std::size_t> d_values,
                                              std::span<const std::size_t> ell_values) {
  std::vector<EmbeddingGridCell> cells;
  for (std::size_t d : d_values)
    for (std::size_t ell : ell_values)
      if (ell >= 1 && ell <= d) cells.push_back({d, ell, embedding_probability(d, ell, eps)});
  return cells;
}

}  // namespace ssd
