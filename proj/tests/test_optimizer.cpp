#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssd/benchmarks.hpp"
#include "ssd/optimizer.hpp"

using namespace ssd;

namespace {

OptimizerConfig base_config(const Benchmark& b, std::size_t ell, StepPolicy step) {
  OptimizerConfig cfg;
  cfg.ell = ell;
  cfg.step = step;
  cfg.f_star = b.f_star;
  cfg.lambda = b.lambda;
  return cfg;
}

}  // namespace

TEST_CASE("relative_error and theory_step") {
  CHECK(relative_error(-0.5, -1.0) == 0.5);
  CHECK(relative_error(0.25, 0.0) == 0.25);
  CHECK(theory_step(100, 3, 8.0) == doctest::Approx(3.0 / 800.0));
}

TEST_CASE("ssd_step: stationary point and exact one-step convergence") {
  const Benchmark q = quadratic(10, 1.0, 1.0);
  ObjectiveOracle oracle(q.objective, Backend::dual_ad);
  RngStream rng(1, 0);
  const DenseVector zero(10);
  const DirectionMatrix p = sample_haar(rng, 10, 3);
  CHECK(ssd_step(zero.span(), oracle, p, 0.7) == zero);

  const DirectionMatrix full = sample_haar(rng, 10, 10);
  const DenseVector x{1, -2, 3, -4, 5, -6, 7, -8, 9, -10};
  const DenseVector x1 = ssd_step(x.span(), oracle, full, 1.0);
  CHECK(norm2(x1.span()) <= 1e-12);
  CHECK_THROWS_AS(ssd_step(x.span(), oracle, full, 0.0), std::invalid_argument);
}

TEST_CASE("ssd_step: expected one-step contraction 1 - l/d on the unit quadratic") {
  const std::size_t d = 20;
  const std::size_t ell = 4;
  const Benchmark q = quadratic(d, 1.0, 1.0);
  ObjectiveOracle oracle(q.objective, Backend::dual_ad);
  RngStream rng(2, 0);
  DenseVector x0(d);
  for (std::size_t i = 0; i < d; ++i) x0[i] = rng.gaussian();
  const double f0 = q.objective->value(x0.span());
  const int runs = 10000;
  double ratio = 0.0;
  for (int r = 0; r < runs; ++r) {
    const DenseVector x1 = ssd_step(x0.span(), oracle, sample_haar(rng, d, ell), static_cast<double>(ell) / d);
    ratio += q.objective->value(x1.span()) / f0 / runs;
  }
  CHECK(ratio <= (1.0 - static_cast<double>(ell) / d) * 1.05);
}

TEST_CASE("run: Armijo on the worst-case function reaches 0.1 relative error within 5000 fevals") {
  const Benchmark b = nesterov_worst(100, 20, 8.0);
  int hits = 0;
  for (std::uint64_t s = 0; s < 100; ++s) {
    ObjectiveOracle oracle(b.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(b, 3, ArmijoStep{});
    cfg.max_fevals = 5000;
    cfg.max_iterations = 100000;
    cfg.target_rel_error = 0.1;
    cfg.seed = 11;
    cfg.stream_id = s;
    const OptimizerTrace t = run(cfg, oracle, DenseVector(100).span());
    const auto cost = t.fevals_to_rel_error(0.1);
    if (cost && *cost <= 5000) ++hits;
  }
  CHECK(hits >= 90);
}

TEST_CASE("run: fixed step below the stability limit never increases f") {
  const Benchmark q = quadratic(40, 0.1, 10.0);
  const Benchmark nw = nesterov_worst(40, 10, 8.0);
  for (const Benchmark* b : {&q, &nw}) {
    for (Scheme s : {Scheme::haar, Scheme::coordinate}) {
      ObjectiveOracle oracle(b->objective, Backend::dual_ad);
      OptimizerConfig cfg = base_config(*b, 5, FixedStep{theory_step(40, 5, *b->lambda)});
      cfg.scheme = s;
      cfg.max_iterations = 300;
      cfg.seed = 3;
      const OptimizerTrace t = run(cfg, oracle, DenseVector(40, 1.0).span());
      CHECK(t.warnings.empty());
      for (std::size_t k = 1; k < t.records.size(); ++k)
        CHECK(t.records[k].f_value <= t.records[k - 1].f_value + 1e-14 * std::abs(t.records[k - 1].f_value));
    }
  }
}

TEST_CASE("run: cumulative fevals strictly increase") {
  const Benchmark b = nesterov_worst(30, 10, 8.0);
  for (StepPolicy step : {StepPolicy{ArmijoStep{}}, StepPolicy{FixedStep{0.01}}}) {
    for (Backend be : {Backend::dual_ad, Backend::finite_difference, Backend::analytic}) {
      ObjectiveOracle oracle(b.objective, be);
      OptimizerConfig cfg = base_config(b, 3, step);
      cfg.max_iterations = 100;
      const OptimizerTrace t = run(cfg, oracle, DenseVector(30).span());
      for (std::size_t k = 1; k < t.records.size(); ++k) CHECK(t.records[k].fevals > t.records[k - 1].fevals);
      CHECK(t.records.back().fevals == oracle.fevals());
    }
  }
}

TEST_CASE("run: replicates replay exactly and streams differ") {
  const Benchmark b = quadratic(25, 0.5, 5.0);
  auto go = [&](std::uint64_t stream) {
    ObjectiveOracle oracle(b.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(b, 2, ArmijoStep{});
    cfg.max_iterations = 50;
    cfg.seed = 5;
    cfg.stream_id = stream;
    return run(cfg, oracle, DenseVector(25, 1.0).span());
  };
  const OptimizerTrace a = go(0);
  const OptimizerTrace a2 = go(0);
  const OptimizerTrace c = go(1);
  REQUIRE(a.records.size() == a2.records.size());
  for (std::size_t k = 0; k < a.records.size(); ++k) {
    CHECK(a.records[k].f_value == a2.records[k].f_value);
    CHECK(a.records[k].fevals == a2.records[k].fevals);
  }
  CHECK(a.x_final == a2.x_final);
  CHECK_FALSE(a.x_final == c.x_final);
  CHECK(a.solver == "haar");
  CHECK(a.seed == 5);
  CHECK(c.stream_id == 1);
}

TEST_CASE("run: termination statuses") {
  const Benchmark q = quadratic(10, 1.0, 4.0);
  const DenseVector x0(10, 1.0);

  SUBCASE("feval budget") {
    ObjectiveOracle oracle(q.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(q, 2, ArmijoStep{});
    cfg.max_fevals = 40;
    const OptimizerTrace t = run(cfg, oracle, x0.span());
    CHECK(t.status == Termination::feval_budget);
    CHECK(to_string(t.status) == "feval-budget");
  }
  SUBCASE("iteration budget") {
    ObjectiveOracle oracle(q.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(q, 2, FixedStep{0.05});
    cfg.max_iterations = 7;
    const OptimizerTrace t = run(cfg, oracle, x0.span());
    CHECK(t.status == Termination::iteration_budget);
    CHECK(t.records.size() == 8);
  }
  SUBCASE("converged on a target") {
    ObjectiveOracle oracle(q.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(q, 5, ArmijoStep{});
    cfg.target_rel_error = 1e-3;
    cfg.max_iterations = 100000;
    const OptimizerTrace t = run(cfg, oracle, x0.span());
    CHECK(t.status == Termination::converged);
    CHECK(t.records.back().rel_error <= 1e-3);
  }
  SUBCASE("linesearch failure after max backtracks") {
    ObjectiveOracle oracle(q.objective, Backend::dual_ad);
    ArmijoStep bad;
    bad.alpha0 = 1e6;
    bad.max_backtracks = 3;
    OptimizerConfig cfg = base_config(q, 2, bad);
    const OptimizerTrace t = run(cfg, oracle, x0.span());
    CHECK(t.status == Termination::linesearch_failure);
    CHECK(t.records.back().step_size == 0.0);
    CHECK(t.x_final == x0);
    // f(x0) plus 2 directional derivatives plus 4 trials
    CHECK(oracle.fevals() == 1 + 2 + 4);
  }
  SUBCASE("zero subspace gradient spends no trial evaluations") {
    ObjectiveOracle oracle(q.objective, Backend::dual_ad);
    OptimizerConfig cfg = base_config(q, 2, ArmijoStep{});
    cfg.max_iterations = 3;
    const OptimizerTrace t = run(cfg, oracle, DenseVector(10).span());
    CHECK(t.status == Termination::iteration_budget);
    CHECK(oracle.fevals() == 1 + 3 * 2);
    for (const auto& r : t.records) CHECK(r.f_value == 0.0);
  }
}

TEST_CASE("run: configuration checks") {
  const Benchmark q = quadratic(6, 1.0, 2.0);
  ObjectiveOracle oracle(q.objective, Backend::dual_ad);
  const DenseVector x0(6, 1.0);
  OptimizerConfig cfg = base_config(q, 7, ArmijoStep{});
  CHECK_THROWS_AS(run(cfg, oracle, x0.span()), std::invalid_argument);
  cfg.ell = 2;
  CHECK_THROWS_AS(run(cfg, oracle, DenseVector(5).span()), std::invalid_argument);
  cfg.scheme = Scheme::gaussian_iid;
  CHECK_THROWS_AS(run(cfg, oracle, x0.span()), std::invalid_argument);
  cfg.allow_baseline_sampler = true;
  cfg.max_iterations = 5;
  CHECK(run(cfg, oracle, x0.span()).solver == "gaussian-iid");
  cfg.scheme = Scheme::haar;
  cfg.step = FixedStep{-1.0};
  CHECK_THROWS_AS(run(cfg, oracle, x0.span()), std::invalid_argument);

  // alpha >= 2l/(d lambda) warns but runs
  cfg.step = FixedStep{2.0 * 2 / (6 * 2.0)};
  const OptimizerTrace t = run(cfg, oracle, x0.span());
  CHECK(t.warnings.size() == 1);
  CHECK(t.records.size() == 6);
}

TEST_CASE("run: monitoring is uncounted and complete") {
  const Benchmark b = nesterov_worst(20, 5, 8.0);
  ObjectiveOracle oracle(b.objective, Backend::dual_ad);
  OptimizerConfig cfg = base_config(b, 20, FixedStep{theory_step(20, 20, 8.0)});
  cfg.max_iterations = 10;
  cfg.track_embedding_eps = 0.1;
  cfg.record_gradient_norm = true;
  cfg.distance_to_solution = b.distance_to_solution;
  const OptimizerTrace t = run(cfg, oracle, DenseVector(20).span());
  CHECK(oracle.fevals() == 10 * 20);
  for (std::size_t k = 0; k + 1 < t.records.size(); ++k) {
    REQUIRE(t.records[k].embedding_success.has_value());
    CHECK(*t.records[k].embedding_success);
  }
  CHECK(t.records[0].grad_norm_sq == doctest::Approx(4.0));
  CHECK(t.max_distance_to_solution == doctest::Approx(norm2(b.x_star->span())));
}

TEST_CASE("gradient descent: textbook contraction and cost model") {
  const Benchmark q = quadratic(15, 0.5, 5.0);
  ObjectiveOracle oracle(q.objective, Backend::dual_ad);
  OptimizerConfig cfg = base_config(q, 1, FixedStep{1.0 / 5.0});
  cfg.max_iterations = 30;
  const OptimizerTrace t = gradient_descent_baseline(cfg, oracle, DenseVector(15, 1.0).span());
  CHECK(t.solver == "gd");
  CHECK(t.ell == 15);
  const double c = 1.0 - 0.5 / 5.0;
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    CHECK(t.records[k].f_value <= c * c * t.records[k - 1].f_value * (1 + 1e-12));
    CHECK(t.records[k].fevals - t.records[k - 1].fevals == 16);
  }
}

TEST_CASE("gradient descent: d + 1 fevals per iteration at d = 10^4") {
  const Benchmark b = nesterov_worst(10000, 20, 8.0);
  for (Backend be : {Backend::analytic, Backend::dual_ad}) {
    ObjectiveOracle oracle(b.objective, be);
    OptimizerConfig cfg = base_config(b, 1, FixedStep{1.0 / 8.0});
    cfg.max_iterations = 2;
    const OptimizerTrace t = gradient_descent_baseline(cfg, oracle, DenseVector(10000).span());
    REQUIRE(t.records.size() == 3);
    CHECK(t.records[1].fevals - t.records[0].fevals == 10001);
    CHECK(t.records[2].fevals - t.records[1].fevals == 10001);
  }
}

TEST_CASE("SSD with l = d Haar matches GD iteration for iteration") {
  const Benchmark q = quadratic(12, 1.0, 6.0);
  OptimizerConfig cfg = base_config(q, 12, FixedStep{1.0 / 6.0});
  cfg.target_rel_error = 1e-8;
  cfg.max_iterations = 10000;
  ObjectiveOracle o1(q.objective, Backend::dual_ad);
  ObjectiveOracle o2(q.objective, Backend::dual_ad);
  const OptimizerTrace ssd = run(cfg, o1, DenseVector(12, 1.0).span());
  const OptimizerTrace gd = gradient_descent_baseline(cfg, o2, DenseVector(12, 1.0).span());
  CHECK(ssd.status == Termination::converged);
  CHECK(ssd.records.size() == gd.records.size());
  for (std::size_t k = 0; k < gd.records.size(); ++k)
    CHECK(ssd.records[k].f_value == doctest::Approx(gd.records[k].f_value).epsilon(1e-9).scale(1e-12));
}
