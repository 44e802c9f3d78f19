#include "ssd/profile.hpp"

#include <algorithm>
#include <stdexcept>

namespace ssd {

PerformanceProfile::PerformanceProfile(std::vector<SolverTrials> trials) : trials_(std::move(trials)) {
  if (trials_.empty()) throw std::invalid_argument("performance profile: no solvers");
  bool any_trial = false;
  for (const auto& s : trials_) {
    for (const auto& c : s.costs) {
      any_trial = true;
      if (!c) continue;
      if (!(*c > 0.0)) throw std::invalid_argument("performance profile: costs must be positive");
      if (!best_ || *c < *best_) best_ = *c;
    }
  }
  if (!any_trial) throw std::invalid_argument("performance profile: no trials");
}

double PerformanceProfile::fraction(std::size_t solver, double tau) const {
  const auto& costs = trials_.at(solver).costs;
  if (costs.empty() || !best_) return 0.0;
  // compare ratios so that tau == breakpoint counts the trial exactly
  const double best = *best_;
  const auto hits = std::count_if(costs.begin(), costs.end(), [&](const auto& c) { return c && *c / best <= tau; });
  return static_cast<double>(hits) / static_cast<double>(costs.size());
}

double PerformanceProfile::success_fraction(std::size_t solver) const {
  const auto& costs = trials_.at(solver).costs;
  if (costs.empty()) return 0.0;
  const auto ok = std::count_if(costs.begin(), costs.end(), [](const auto& c) { return c.has_value(); });
  return static_cast<double>(ok) / static_cast<double>(costs.size());
}

std::vector<double> PerformanceProfile::breakpoints() const {
  std::vector<double> taus{1.0};
  if (best_) {
    for (const auto& s : trials_)
      for (const auto& c : s.costs)
        if (c) taus.push_back(*c / *best_);
  }
  std::sort(taus.begin(), taus.end());
  taus.erase(std::unique(taus.begin(), taus.end()), taus.end());
  return taus;
}

std::vector<ProfilePoint> PerformanceProfile::curve(std::size_t solver, std::span<const double> taus) const {
  std::vector<ProfilePoint> out;
  out.reserve(taus.size());
  for (double t : taus) out.push_back({t, fraction(solver, t)});
  return out;
}

}  // namespace ssd
