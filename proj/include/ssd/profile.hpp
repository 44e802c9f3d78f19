#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ssd {

/// Per-trial cost (function evaluations to reach the threshold) for one
/// solver or parameterization; nullopt marks an unsuccessful trial.
struct SolverTrials {
  std::string solver;
  std::vector<std::optional<double>> costs;
};

struct ProfilePoint {
  double tau;
  double fraction;
};

/// Dolan-More style profile over randomized trials. The reference cost is
/// the fewest evaluations in any successful trial across all solvers, and a
/// solver's curve at tau is the fraction of its trials with cost <= tau * best.
class PerformanceProfile {
 public:
  /// Throws std::invalid_argument if there are no solvers or no trials.
  explicit PerformanceProfile(std::vector<SolverTrials> trials);

  std::size_t solver_count() const { return trials_.size(); }
  const std::string& solver(std::size_t i) const { return trials_.at(i).solver; }
  /// Reference cost; nullopt when no trial succeeded.
  std::optional<double> best() const { return best_; }

  double fraction(std::size_t solver, double tau) const;
  double success_fraction(std::size_t solver) const;

  /// Sorted distinct tau values where some curve jumps (always includes 1).
  std::vector<double> breakpoints() const;
  std::vector<ProfilePoint> curve(std::size_t solver, std::span<const double> taus) const;

 private:
  std::vector<SolverTrials> trials_;
  std::optional<double> best_;
};

}  // namespace ssd
