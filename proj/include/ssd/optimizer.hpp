#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "ssd/linalg.hpp"
#include "ssd/oracle.hpp"
#include "ssd/samplers.hpp"

namespace ssd {

struct FixedStep {
  double alpha = 0.0;
};

/// Backtracking on alpha = alpha0 * shrink^m until
/// f(x - alpha g) <= f(x) - slope * alpha * ||P^T grad f||^2.
struct ArmijoStep {
  double alpha0 = 1.0;
  double shrink = 0.5;
  double slope = 1e-4;
  int max_backtracks = 50;
};

using StepPolicy = std::variant<FixedStep, ArmijoStep>;

struct OptimizerConfig {
  std::size_t ell = 1;
  Scheme scheme = Scheme::haar;
  StepPolicy step = ArmijoStep{};
  std::size_t max_iterations = 1000;
  std::uint64_t max_fevals = std::numeric_limits<std::uint64_t>::max();
  std::optional<double> target_f;
  std::optional<double> target_rel_error;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  // Known problem data used for monitoring only (never charged).
  std::optional<double> f_star;
  std::optional<double> lambda;  // enables the fixed-step stability warning
  std::function<double(std::span<const double>)> distance_to_solution;

  /// Record per-iteration embedding success of the true gradient at this eps.
  std::optional<double> track_embedding_eps;
  /// Record ||grad f(x_k)||^2 per iteration.
  bool record_gradient_norm = false;
  /// The gaussian-iid scheme violates P^T P = (d/l) I; it must be requested explicitly.
  bool allow_baseline_sampler = false;
};

enum class Termination { converged, feval_budget, iteration_budget, linesearch_failure };

std::string_view to_string(Termination t);

struct TraceRecord {
  std::size_t iteration = 0;
  std::uint64_t fevals = 0;
  double f_value = 0.0;
  double rel_error = 0.0;
  double step_size = 0.0;
  std::optional<bool> embedding_success;
  std::optional<double> grad_norm_sq;
};

struct OptimizerTrace {
  std::vector<TraceRecord> records;
  Termination status = Termination::iteration_budget;
  DenseVector x_final;
  std::string solver;  // scheme name, or "gd"
  std::size_t ell = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
  /// max over iterates of distance_to_solution, when provided.
  std::optional<double> max_distance_to_solution;
  std::vector<std::string> warnings;

  /// First charged feval count at which rel_error <= threshold.
  std::optional<std::uint64_t> fevals_to_rel_error(double threshold) const;
};

/// (f - f*) / |f*|, or f - f* when f* == 0.
double relative_error(double f, double f_star);

/// Default fixed step l / (d lambda).
double theory_step(std::size_t d, std::size_t ell, double lambda);

/// x - alpha P (P^T grad f(x)), using only the oracle's subspace gradient.
DenseVector ssd_step(std::span<const double> x, ObjectiveOracle& oracle, const DirectionMatrix& p, double alpha);

/// Runs stochastic subspace descent until a stop condition.
/// Throws std::invalid_argument on an invalid configuration.
OptimizerTrace run(const OptimizerConfig& config, ObjectiveOracle& oracle, std::span<const double> x0);

/// Full-gradient descent with the same step policies; each gradient is charged d+1.
OptimizerTrace gradient_descent_baseline(const OptimizerConfig& config, ObjectiveOracle& oracle,
                                         std::span<const double> x0);

}  // namespace ssd
