#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>

#include "ssd/linalg.hpp"
#include "ssd/oracle.hpp"

namespace ssd {

/// An objective plus what is known about it: optimum, curvature constants,
/// and a distance to the minimizer set (used for convex-rate checks).
struct Benchmark {
  std::string name;
  std::shared_ptr<const Objective> objective;
  std::optional<double> f_star;
  std::optional<DenseVector> x_star;
  std::optional<double> gamma;   // strong convexity or PL constant
  std::optional<double> lambda;  // gradient Lipschitz constant
  std::optional<std::size_t> intrinsic_dim;
  std::function<double(std::span<const double>)> distance_to_solution;

  std::size_t dim() const { return objective->dim(); }
};

/// Nesterov's worst-case convex quadratic restricted to the first r
/// coordinates:
///   f(x) = L/4 * ((x_1^2 + sum_{i<r} (x_i - x_{i+1})^2 + x_r^2) / 2 - x_1),
/// minimum -L r / (8 (r+1)) at x_i = 1 - i/(r+1), i <= r.
Benchmark nesterov_worst(std::size_t d, std::size_t r, double lipschitz);

enum class Spectrum { log_uniform, linear };

/// f(x) = x^T D x / 2 with diag(D) spread over [gamma, lambda].
Benchmark quadratic(std::size_t d, double gamma, double lambda, Spectrum spectrum = Spectrum::log_uniform);

/// f(x) = ||A x - b||^2 with A (n x d) of the given rank < d and b in
/// range(A). PL with gamma = 2 s_min^2, Lipschitz lambda = 2 s_max^2.
Benchmark rankdef_least_squares(std::size_t n, std::size_t d, std::size_t rank, std::uint64_t seed,
                                double s_min = 1.0, double s_max = 2.0);

}  // namespace ssd
