#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string_view>

#include "ssd/dual.hpp"
#include "ssd/linalg.hpp"

namespace ssd {

/// A differentiable scalar objective with plain, dual and analytic-gradient
/// evaluation paths.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual std::size_t dim() const = 0;
  virtual double value(std::span<const double> x) const = 0;
  virtual Dual value(std::span<const Dual> x) const = 0;
  virtual void gradient(std::span<const double> x, std::span<double> g) const = 0;
};

/// Adapter that implements both value() overloads from one templated
/// `evaluate<T>` in Derived, so f and its dual extension share a code path.
template <class Derived>
class GenericObjective : public Objective {
 public:
  double value(std::span<const double> x) const final { return derived().template evaluate<double>(x); }
  Dual value(std::span<const Dual> x) const final { return derived().template evaluate<Dual>(x); }

 private:
  const Derived& derived() const { return static_cast<const Derived&>(*this); }
};

enum class Backend { analytic, dual_ad, finite_difference };

std::string_view to_string(Backend b);
/// Parses "analytic", "dual-ad" or "finite-difference".
std::optional<Backend> parse_backend(std::string_view name);

/// Counting wrapper around an Objective. One instance per optimization run.
///
/// Two counters are kept. `evaluations()` counts scalar evaluations as
/// performed (an analytic gradient call counts once). `fevals()` is the
/// experiment cost axis: an analytic gradient is charged d+1, as is every
/// full gradient requested by the gradient-descent baseline.
class ObjectiveOracle {
 public:
  ObjectiveOracle(std::shared_ptr<const Objective> objective, Backend backend,
                  std::optional<double> fd_step = std::nullopt);

  std::size_t dim() const { return objective_->dim(); }
  Backend backend() const { return backend_; }
  const Objective& objective() const { return *objective_; }

  /// f(x); counted.
  double value(std::span<const double> x);

  /// P^T grad f(x) (length P.cols()), via the configured backend.
  DenseVector subspace_gradient(std::span<const double> x, const DenseMatrix& p);

  /// Full gradient charged at d+1 regardless of backend. The finite-difference
  /// backend performs d+1 forward evaluations; dual-ad performs d passes.
  DenseVector full_gradient(std::span<const double> x);

  // Uncounted monitoring access.
  double peek_value(std::span<const double> x) const;
  DenseVector peek_gradient(std::span<const double> x) const;

  std::uint64_t evaluations() const { return evaluations_; }
  std::uint64_t fevals() const { return fevals_; }
  void reset_counters() { evaluations_ = fevals_ = 0; }

  /// Forward-difference step used at x: the fixed step if configured, else
  /// 1e-6 * max(1, ||x||).
  double fd_step_at(std::span<const double> x) const;

 private:
  void check_dim(std::size_t n) const;
  double counted_value(std::span<const double> x);

  std::shared_ptr<const Objective> objective_;
  Backend backend_;
  std::optional<double> fd_step_;
  std::uint64_t evaluations_ = 0;
  std::uint64_t fevals_ = 0;
};

}  // namespace ssd
