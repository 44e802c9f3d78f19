#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace ssd {

/// Regularized incomplete Beta function I_p(a, b), i.e. the Beta(a, b) CDF.
/// Continued fraction (modified Lentz) with the usual symmetry swap.
/// Throws DomainError outside 0 <= p <= 1, a > 0, b > 0.
double beta_cdf(double p, double a, double b);

/// Probability that a scaled Haar draw embeds a fixed vector successfully,
/// 1 - I_{(1-eps) l/d}(l/2, (d-l)/2). Exactly 1 when l == d.
double embedding_probability(std::size_t d, std::size_t ell, double eps);

/// Optimal sub-Gaussian proxy variance of Binomial(k, delta):
/// k (1 - 2 delta) / (2 log((1 - delta)/delta)), with the continuous value
/// k/4 at delta = 1/2.
double proxy_variance(std::size_t k, double delta);

/// Per-iteration expected contraction of SSD with alpha = l/(d lambda).
double ssd_rate_factor(std::size_t d, std::size_t ell, double gamma, double lambda);
/// Contraction factor of single-sample Gaussian smoothing, 1 - gamma/(8 lambda (d+4)).
double gaussian_smoothing_rate_factor(std::size_t d, double gamma, double lambda);

struct TheoryParams {
  std::size_t d = 1;
  std::size_t ell = 1;
  double eps = 0.5;
  double gamma = 1.0;
  double lambda = 1.0;
  std::size_t k = 1;         // horizon
  std::optional<double> t;   // defaults to delta / 2

  /// Throws DomainError on violated invariants.
  void validate() const;
};

/// Expected-rate curves indexed by iteration 0..k.
struct RateBounds {
  double omega = 0.0;
  std::vector<double> strongly_convex;  // omega^k * f0_err
  std::vector<double> convex;           // 2 d lambda R^2 / (k l); +inf at k = 0
  std::vector<double> nonconvex;        // 2 d lambda f0_err / ((k+1) l)
};

RateBounds expected_rate_bounds(const TheoryParams& params, double f0_err, double radius);

struct HighProbabilityBound {
  double delta = 0.0;
  double t = 0.0;
  double rho = 0.0;
  std::vector<double> sigma_sq;  // proxy variance at each k (0 at k = 0)
  std::vector<double> tail;      // exp(-(k t)^2 / (2 sigma_k^2)), 1 at k = 0
};

/// High-probability linear rate for strongly convex objectives under Haar
/// sampling. Throws DomainError unless 0 < t <= delta.
HighProbabilityBound high_prob_bound(const TheoryParams& params);

struct EmbeddingGridCell {
  std::size_t d;
  std::size_t ell;
  double delta;
};

/// delta over every (d, l) pair with l <= d.
std::vector<EmbeddingGridCell> embedding_grid(double eps, std::span<const std::size_t> d_values,
                                              std::span<const std::size_t> ell_values);

}  // namespace ssd
