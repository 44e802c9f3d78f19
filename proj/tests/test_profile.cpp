#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <vector>

#include "ssd/experiment.hpp"
#include "ssd/profile.hpp"

using namespace ssd;

TEST_CASE("profile: identical costs give a unit step at tau = 1") {
  const PerformanceProfile p({{"a", {7.0, 7.0, 7.0}}});
  CHECK(p.best() == 7.0);
  CHECK(p.fraction(0, 0.999) == 0.0);
  CHECK(p.fraction(0, 1.0) == 1.0);
  CHECK(p.fraction(0, 50.0) == 1.0);
  CHECK(p.breakpoints() == std::vector<double>{1.0});
}

TEST_CASE("profile: second solver reaches 1 at tau = 2") {
  const PerformanceProfile p({{"fast", {10.0}}, {"slow", {20.0}}});
  CHECK(p.fraction(0, 1.0) == 1.0);
  CHECK(p.fraction(1, 1.0) == 0.0);
  CHECK(p.fraction(1, 1.999) == 0.0);
  CHECK(p.fraction(1, 2.0) == 1.0);
  CHECK(p.breakpoints() == std::vector<double>{1.0, 2.0});
}

TEST_CASE("profile: failures cap the curve at the success fraction") {
  const PerformanceProfile p({{"a", {3.0, std::nullopt, 9.0, 6.0}}, {"b", {std::nullopt, std::nullopt}}});
  CHECK(p.success_fraction(0) == 0.75);
  CHECK(p.success_fraction(1) == 0.0);
  const auto taus = p.breakpoints();
  CHECK(taus == std::vector<double>{1.0, 2.0, 3.0});
  const auto curve = p.curve(0, taus);
  CHECK(curve[0].fraction == 0.25);
  CHECK(curve[1].fraction == 0.5);
  CHECK(curve[2].fraction == 0.75);
  CHECK(p.fraction(0, 1e9) == 0.75);
  CHECK(p.fraction(1, 1e9) == 0.0);
}

TEST_CASE("profile: no successful trial anywhere") {
  const PerformanceProfile p({{"a", {std::nullopt}}});
  CHECK_FALSE(p.best().has_value());
  CHECK(p.fraction(0, 10.0) == 0.0);
  CHECK(p.breakpoints() == std::vector<double>{1.0});
}

TEST_CASE("profile: empty input and invalid costs") {
  CHECK_THROWS_AS(PerformanceProfile({}), std::invalid_argument);
  CHECK_THROWS_AS(PerformanceProfile(std::vector<SolverTrials>{SolverTrials{"a", {}}}), std::invalid_argument);
  CHECK_THROWS_AS(PerformanceProfile({{"a", {0.0}}}), std::invalid_argument);
  CHECK_THROWS_AS(PerformanceProfile({{"a", {-3.0}}}), std::invalid_argument);
}

TEST_CASE("profile: 300 SSD replicates on a 30-dim quadratic, 95% threshold") {
  experiment::ExperimentConfig cfg;
  cfg.benchmark.name = "quadratic";
  cfg.benchmark.d = 30;
  cfg.benchmark.gamma = 1.0;
  cfg.benchmark.lambda = 30.0;
  cfg.replicates = 300;
  cfg.seed = 4;
  cfg.max_iterations = 4000;
  cfg.max_fevals = 600;
  for (std::size_t ell : {1u, 5u, 15u}) {
    experiment::SolverSpec s;
    s.scheme = Scheme::haar;
    s.ell = ell;
    s.step = ArmijoStep{};
    s.label = "haar-" + std::to_string(ell);
    cfg.solvers.push_back(s);
  }
  const auto result = experiment::execute(cfg, 1);
  const auto rows = experiment::profile_rows(result.traces, 0.95, {{"bfgs", 90.0}});

  std::map<std::string, std::vector<double>> curves;
  for (const auto& r : rows) curves[r.solver].push_back(r.fraction);
  REQUIRE(curves.size() == 4);

  std::map<std::string, double> success;
  for (const auto& t : result.traces) {
    success[t.solver] += experiment::fevals_to_decrease(t.rows, 0.95) ? 1.0 / 300 : 0.0;
  }
  success["bfgs"] = 1.0;
  bool someone_failed = false;
  for (const auto& [name, c] : curves) {
    for (std::size_t i = 1; i < c.size(); ++i) CHECK(c[i] >= c[i - 1]);
    CHECK(c.back() <= success[name] + 1e-12);
    CHECK(c.back() == doctest::Approx(success[name]));
    someone_failed = someone_failed || success[name] < 1.0;
  }
  // the baseline is a single trial, so its curve is a single jump
  const auto& bfgs = curves["bfgs"];
  CHECK(std::count(bfgs.begin(), bfgs.end(), 0.0) + std::count(bfgs.begin(), bfgs.end(), 1.0) ==
        static_cast<long>(bfgs.size()));
  MESSAGE("some solver hit the budget before the threshold: " << someone_failed);
}
