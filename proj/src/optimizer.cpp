#include "ssd/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ssd {
namespace {

struct Direction {
  DenseVector step;    // g; the update is x - alpha g
  double slope = 0.0;  // g^T grad f as seen by the oracle, ||P^T grad f||^2
};

using DirectionFn = std::function<Direction(std::span<const double>, ObjectiveOracle&, RngStream&,
                                            std::optional<DirectionMatrix>&)>;

void validate(const OptimizerConfig& config, const ObjectiveOracle& oracle, std::span<const double> x0) {
  if (x0.size() != oracle.dim()) throw std::invalid_argument("optimizer: x0 has wrong dimension");
  for (double v : x0)
    if (!std::isfinite(v)) throw std::invalid_argument("optimizer: x0 must be finite");
  if (std::holds_alternative<FixedStep>(config.step)) {
    if (!(std::get<FixedStep>(config.step).alpha > 0.0)) throw std::invalid_argument("optimizer: alpha must be positive");
  } else {
    const auto& a = std::get<ArmijoStep>(config.step);
    if (!(a.alpha0 > 0.0)) throw std::invalid_argument("optimizer: alpha0 must be positive");
    if (!(a.shrink > 0.0 && a.shrink < 1.0)) throw std::invalid_argument("optimizer: shrink must lie in (0, 1)");
    if (!(a.slope > 0.0 && a.slope < 1.0)) throw std::invalid_argument("optimizer: slope must lie in (0, 1)");
    if (a.max_backtracks < 0) throw std::invalid_argument("optimizer: max_backtracks must be >= 0");
  }
  if (config.track_embedding_eps && !(*config.track_embedding_eps > 0.0 && *config.track_embedding_eps < 1.0))
    throw std::invalid_argument("optimizer: embedding eps must lie in (0, 1)");
}

bool target_reached(const OptimizerConfig& config, const TraceRecord& rec) {
  if (config.target_f && rec.f_value <= *config.target_f) return true;
  if (config.target_rel_error && config.f_star && rec.rel_error <= *config.target_rel_error) return true;
  return false;
}

OptimizerTrace run_loop(const OptimizerConfig& config, ObjectiveOracle& oracle, std::span<const double> x0,
                        const DirectionFn& next_direction, std::string solver, std::size_t ell) {
  validate(config, oracle, x0);

  OptimizerTrace trace;
  trace.solver = std::move(solver);
  trace.ell = ell;
  trace.seed = config.seed;
  trace.stream_id = config.stream_id;

  const std::size_t d = oracle.dim();
  const auto* fixed = std::get_if<FixedStep>(&config.step);
  const auto* armijo = std::get_if<ArmijoStep>(&config.step);
  if (fixed && config.lambda) {
    const double limit = 2.0 * static_cast<double>(ell) / (static_cast<double>(d) * *config.lambda);
    if (fixed->alpha >= limit) {
      std::ostringstream msg;
      msg << "fixed step " << fixed->alpha << " is not below the stability limit 2l/(d lambda) = " << limit;
      trace.warnings.push_back(msg.str());
    }
  }

  RngStream rng(config.seed, config.stream_id);
  DenseVector x(std::vector<double>(x0.begin(), x0.end()));

  // f(x) known to the algorithm (Armijo keeps it from accepted trials)
  std::optional<double> fx;
  if (armijo) fx = oracle.value(x.span());

  auto make_record = [&](std::size_t k, double step, double f) {
    TraceRecord rec;
    rec.iteration = k;
    rec.fevals = oracle.fevals();
    rec.f_value = f;
    rec.rel_error = config.f_star ? relative_error(f, *config.f_star) : std::numeric_limits<double>::quiet_NaN();
    rec.step_size = step;
    if (config.record_gradient_norm) rec.grad_norm_sq = squared_norm(oracle.peek_gradient(x.span()).span());
    if (config.distance_to_solution) {
      const double dist = config.distance_to_solution(x.span());
      trace.max_distance_to_solution = std::max(trace.max_distance_to_solution.value_or(0.0), dist);
    }
    return rec;
  };

  trace.records.push_back(make_record(0, 0.0, fx ? *fx : oracle.peek_value(x.span())));
  if (target_reached(config, trace.records.back())) {
    trace.status = Termination::converged;
    trace.x_final = std::move(x);
    return trace;
  }

  std::optional<DirectionMatrix> p_holder;
  for (std::size_t k = 0;; ++k) {
    if (k >= config.max_iterations) {
      trace.status = Termination::iteration_budget;
      break;
    }
    if (oracle.fevals() >= config.max_fevals) {
      trace.status = Termination::feval_budget;
      break;
    }

    const Direction dir = next_direction(x.span(), oracle, rng, p_holder);

    if (config.track_embedding_eps) {
      // uncounted; x has not moved yet
      const DenseVector grad = oracle.peek_gradient(x.span());
      const double gg = squared_norm(grad.span());
      const double pg = p_holder ? squared_norm(matTvec(p_holder->matrix(), grad.span()).span()) : gg;
      trace.records.back().embedding_success = gg == 0.0 || pg >= (1.0 - *config.track_embedding_eps) * gg;
    }

    double step = 0.0;
    bool failed = false;
    if (fixed) {
      step = fixed->alpha;
      axpy(-step, dir.step.span(), x.span());
    } else if (dir.slope > 0.0) {
      // a zero subspace gradient leaves x in place without trial evaluations
      double alpha = armijo->alpha0;
      failed = true;
      DenseVector trial(d);
      for (int m = 0; m <= armijo->max_backtracks; ++m) {
        for (std::size_t i = 0; i < d; ++i) trial[i] = x[i] - alpha * dir.step[i];
        const double ft = oracle.value(trial.span());
        if (ft <= *fx - armijo->slope * alpha * dir.slope) {
          x = trial;
          fx = ft;
          step = alpha;
          failed = false;
          break;
        }
        alpha *= armijo->shrink;
      }
    }

    trace.records.push_back(make_record(k + 1, step, fx ? *fx : oracle.peek_value(x.span())));
    if (failed) {
      trace.status = Termination::linesearch_failure;
      break;
    }
    if (target_reached(config, trace.records.back())) {
      trace.status = Termination::converged;
      break;
    }
  }
  trace.x_final = std::move(x);
  return trace;
}

}  // namespace

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::converged:
      return "converged";
    case Termination::feval_budget:
      return "feval-budget";
    case Termination::iteration_budget:
      return "iteration-budget";
    case Termination::linesearch_failure:
      return "linesearch-failure";
  }
  return "unknown";
}

std::optional<std::uint64_t> OptimizerTrace::fevals_to_rel_error(double threshold) const {
  for (const auto& r : records)
    if (r.rel_error <= threshold) return r.fevals;
  return std::nullopt;
}

double relative_error(double f, double f_star) {
  if (f_star == 0.0) return f - f_star;
  return (f - f_star) / std::abs(f_star);
}

double theory_step(std::size_t d, std::size_t ell, double lambda) {
  return static_cast<double>(ell) / (static_cast<double>(d) * lambda);
}

DenseVector ssd_step(std::span<const double> x, ObjectiveOracle& oracle, const DirectionMatrix& p, double alpha) {
  if (!(alpha > 0.0)) throw std::invalid_argument("ssd_step: alpha must be positive");
  const DenseVector projected = oracle.subspace_gradient(x, p.matrix());
  const DenseVector g = matvec(p.matrix(), projected.span());
  DenseVector out(std::vector<double>(x.begin(), x.end()));
  axpy(-alpha, g.span(), out.span());
  return out;
}

OptimizerTrace run(const OptimizerConfig& config, ObjectiveOracle& oracle, std::span<const double> x0) {
  const std::size_t d = oracle.dim();
  if (config.ell < 1 || config.ell > d) throw std::invalid_argument("optimizer: need 1 <= ell <= d");
  if (config.scheme == Scheme::gaussian_iid && !config.allow_baseline_sampler)
    throw std::invalid_argument("optimizer: gaussian-iid is a baseline sampler; set allow_baseline_sampler");

  DirectionFn next = [&config, d](std::span<const double> x, ObjectiveOracle& o, RngStream& rng,
                                  std::optional<DirectionMatrix>& holder) {
    holder.emplace(sample_directions(config.scheme, rng, d, config.ell));
    const DenseVector projected = o.subspace_gradient(x, holder->matrix());
    Direction dir;
    dir.slope = squared_norm(projected.span());
    dir.step = matvec(holder->matrix(), projected.span());
    return dir;
  };
  return run_loop(config, oracle, x0, next, std::string(to_string(config.scheme)), config.ell);
}

OptimizerTrace gradient_descent_baseline(const OptimizerConfig& config, ObjectiveOracle& oracle,
                                         std::span<const double> x0) {
  DirectionFn next = [](std::span<const double> x, ObjectiveOracle& o, RngStream&,
                        std::optional<DirectionMatrix>& holder) {
    holder.reset();
    Direction dir;
    dir.step = o.full_gradient(x);
    dir.slope = squared_norm(dir.step.span());
    return dir;
  };
  return run_loop(config, oracle, x0, next, "gd", oracle.dim());
}

}  // namespace ssd
