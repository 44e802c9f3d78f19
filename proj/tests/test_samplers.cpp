#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "ssd/analytics.hpp"
#include "ssd/samplers.hpp"

using namespace ssd;

namespace {

double frame_error(const DirectionMatrix& p) {
  DenseMatrix g = matTmul(p.matrix(), p.matrix());
  const double s = static_cast<double>(p.dim()) / static_cast<double>(p.ell());
  for (std::size_t i = 0; i < p.ell(); ++i) g(i, i) -= s;
  return symmetric_operator_norm(g);
}

// two-sample Kolmogorov-Smirnov statistic
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  std::size_t i = 0;
  std::size_t j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= x) ++i;
    while (j < b.size() && b[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() - static_cast<double>(j) / b.size()));
  }
  return d;
}

// Entrywise mean of P P^T over draws, checked against I within 4 standard errors.
void check_unbiased(Scheme scheme, std::size_t d, std::size_t ell, std::size_t draws, std::uint64_t seed) {
  RngStream rng(seed, 0);
  std::vector<double> sum(d * d, 0.0);
  std::vector<double> sum_sq(d * d, 0.0);
  for (std::size_t n = 0; n < draws; ++n) {
    const DirectionMatrix p = sample_directions(scheme, rng, d, ell);
    const DenseMatrix& m = p.matrix();
    for (std::size_t j = 0; j < d; ++j)
      for (std::size_t i = 0; i <= j; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < ell; ++c) s += m(i, c) * m(j, c);
        sum[j * d + i] += s;
        sum_sq[j * d + i] += s * s;
      }
  }
  std::size_t outside = 0;
  double worst = 0.0;
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i <= j; ++i) {
      const double mean = sum[j * d + i] / draws;
      const double var = sum_sq[j * d + i] / draws - mean * mean;
      const double se = std::sqrt(var / draws);
      const double z = std::abs(mean - (i == j ? 1.0 : 0.0)) / se;
      worst = std::max(worst, z);
      if (z > 4.0) ++outside;
    }
  INFO("largest |z| = " << worst);
  CHECK(outside == 0);
}

}  // namespace

TEST_CASE("structure: P^T P = (d/l) I for haar and coordinate") {
  RngStream rng(1, 0);
  for (auto [d, ell] : {std::pair<std::size_t, std::size_t>{50, 5}, {200, 10}, {100, 100}, {7, 1}, {3, 3}}) {
    for (Scheme s : {Scheme::haar, Scheme::coordinate}) {
      const DirectionMatrix p = sample_directions(s, rng, d, ell);
      CHECK(p.dim() == d);
      CHECK(p.ell() == ell);
      CHECK(p.is_isotropic_frame());
      CHECK(frame_error(p) <= 1e-10);
    }
  }
}

TEST_CASE("haar: l = d gives an orthogonal matrix, so P P^T g = g") {
  RngStream rng(2, 0);
  const DirectionMatrix p = sample_haar(rng, 12, 12);
  DenseMatrix ppt = matmul(p.matrix(), p.matrix().transpose());
  for (std::size_t i = 0; i < 12; ++i) ppt(i, i) -= 1.0;
  CHECK(symmetric_operator_norm(ppt) <= 1e-10);
}

TEST_CASE("haar: unbiased, E P P^T = I at d=50, l=5") { check_unbiased(Scheme::haar, 50, 5, 100000, 3); }

TEST_CASE("coordinate: unbiased, E P P^T = I") { check_unbiased(Scheme::coordinate, 20, 4, 100000, 4); }

TEST_CASE("gaussian-iid: E P P^T = I at d=20, l=4") { check_unbiased(Scheme::gaussian_iid, 20, 4, 100000, 5); }

TEST_CASE("haar: mean-square error of the projected estimator") {
  // E||P P^T v - v||^2 = d/l - 1 for the scaled frame; the unscaled
  // projector Q Q^T = (l/d) P P^T has E||Q Q^T v - v||^2 = 1 - l/d.
  const std::size_t d = 50;
  const std::size_t ell = 5;
  const std::size_t draws = 50000;
  RngStream rng(6, 0);
  DenseVector v(d);
  for (std::size_t i = 0; i < d; ++i) v[i] = rng.gaussian();
  const double nv = norm2(v.span());
  for (std::size_t i = 0; i < d; ++i) v[i] /= nv;

  double sum_p = 0.0;
  double sum_p_sq = 0.0;
  double sum_q = 0.0;
  for (std::size_t n = 0; n < draws; ++n) {
    const DirectionMatrix p = sample_haar(rng, d, ell);
    const DenseVector ppv = matvec(p.matrix(), matTvec(p.matrix(), v.span()).span());
    double ep = 0.0;
    double eq = 0.0;
    const double shrink = static_cast<double>(ell) / d;
    for (std::size_t i = 0; i < d; ++i) {
      ep += (ppv[i] - v[i]) * (ppv[i] - v[i]);
      eq += (shrink * ppv[i] - v[i]) * (shrink * ppv[i] - v[i]);
    }
    sum_p += ep;
    sum_p_sq += ep * ep;
    sum_q += eq;
  }
  const double mean_p = sum_p / draws;
  const double se_p = std::sqrt((sum_p_sq / draws - mean_p * mean_p) / draws);
  CHECK(std::abs(mean_p - (static_cast<double>(d) / ell - 1.0)) <= 4.0 * se_p);
  CHECK(sum_q / draws == doctest::Approx(1.0 - static_cast<double>(ell) / d).epsilon(0.01));
}

TEST_CASE("coordinate: embedding of e_1 is all-or-nothing") {
  const std::size_t d = 10;
  const std::size_t ell = 2;
  const std::size_t draws = 100000;
  RngStream rng(7, 0);
  const DenseVector e1 = DenseVector::basis(d, 0);
  std::size_t ones = 0;
  std::size_t zeros = 0;
  double s = 0.0;
  double ss = 0.0;
  for (std::size_t n = 0; n < draws; ++n) {
    const DirectionMatrix p = sample_coordinate(rng, d, ell);
    const double z = embedded_squared_norm(p, e1.span());
    const double scaled = z * ell / d;
    if (std::abs(scaled - 1.0) < 1e-12) ++ones;
    if (scaled == 0.0) ++zeros;
    s += z;
    ss += z * z;
  }
  CHECK(ones + zeros == draws);
  const double p_hat = static_cast<double>(ones) / draws;
  const double sigma = std::sqrt(0.2 * 0.8 / draws);
  CHECK(std::abs(p_hat - 0.2) <= 3.0 * sigma);
  CHECK(std::abs(static_cast<double>(zeros) / draws - 0.8) <= 3.0 * sigma);
  const double mean = s / draws;
  const double var = (ss - draws * mean * mean) / (draws - 1);
  CHECK(var == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("coordinate: l = d is a permutation with P P^T = I exactly") {
  RngStream rng(8, 0);
  const DirectionMatrix p = sample_coordinate(rng, 9, 9);
  const DenseMatrix ppt = matmul(p.matrix(), p.matrix().transpose());
  CHECK(ppt == DenseMatrix::identity(9));
  std::vector<std::size_t> cols = p.columns();
  std::sort(cols.begin(), cols.end());
  for (std::size_t i = 0; i < 9; ++i) CHECK(cols[i] == i);
}

TEST_CASE("gaussian-iid: baseline only, not an exact frame") {
  RngStream rng(9, 0);
  const DirectionMatrix p = sample_gaussian_iid(rng, 8, 8);
  CHECK_FALSE(p.is_isotropic_frame());
  CHECK(frame_error(p) > 1e-3);
  const DenseVector g{1, 2, 3, 4, 5, 6, 7, 8};
  const DenseVector est = matvec(p.matrix(), matTvec(p.matrix(), g.span()).span());
  double diff = 0.0;
  for (std::size_t i = 0; i < 8; ++i) diff = std::max(diff, std::abs(est[i] - g[i]));
  CHECK(diff > 1e-3);

  RngStream a(10, 3);
  RngStream b(10, 3);
  const DirectionMatrix one = sample_gaussian_iid(a, 6, 1);
  const DenseMatrix z = gaussian_matrix(b, 6, 1);
  CHECK(one.matrix() == z);
}

TEST_CASE("haar: rotation invariance of ||P^T v||^2") {
  // the law of ||P^T v||^2 must not depend on the direction of v
  const std::size_t d = 30;
  const std::size_t ell = 3;
  const std::size_t draws = 20000;
  RngStream rng(11, 0);
  DenseVector u(d);
  for (std::size_t i = 0; i < d; ++i) u[i] = rng.gaussian();
  const double nu = norm2(u.span());
  for (std::size_t i = 0; i < d; ++i) u[i] /= nu;
  const DenseVector e1 = DenseVector::basis(d, 0);

  std::vector<double> a;
  std::vector<double> b;
  RngStream ra(11, 1);
  RngStream rb(11, 2);
  for (std::size_t n = 0; n < draws; ++n) {
    a.push_back(embedded_squared_norm(sample_haar(ra, d, ell), e1.span()));
    b.push_back(embedded_squared_norm(sample_haar(rb, d, ell), u.span()));
  }
  const double crit = 1.95 * std::sqrt(2.0 / draws);
  CHECK(ks_two_sample(a, b) < crit);
}

TEST_CASE("haar: successive draws are uncorrelated") {
  const std::size_t draws = 50000;
  RngStream rng(12, 0);
  const DenseVector e1 = DenseVector::basis(20, 0);
  std::vector<double> z;
  for (std::size_t n = 0; n < draws; ++n) z.push_back(embedded_squared_norm(sample_haar(rng, 20, 2), e1.span()));
  double mean = 0.0;
  for (double v : z) mean += v;
  mean /= draws;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t n = 0; n + 1 < draws; ++n) num += (z[n] - mean) * (z[n + 1] - mean);
  for (double v : z) den += (v - mean) * (v - mean);
  CHECK(std::abs(num / den) < 4.0 / std::sqrt(static_cast<double>(draws)));
}

TEST_CASE("embedding_success: exact cases") {
  RngStream rng(13, 0);
  const DenseVector v{0.3, -1.0, 2.0, 0.5};
  const DirectionMatrix full = sample_haar(rng, 4, 4);
  for (double eps : {1e-9, 0.1, 0.5, 0.99}) CHECK(embedding_success(full, v.span(), eps));

  const DirectionMatrix c = sample_coordinate(rng, 10, 3);
  for (std::size_t j = 0; j < 10; ++j) {
    const bool chosen = std::find(c.columns().begin(), c.columns().end(), j) != c.columns().end();
    for (double eps : {0.1, 0.5, 0.999}) CHECK(embedding_success(c, DenseVector::basis(10, j).span(), eps) == chosen);
  }

  CHECK_THROWS_AS(embedding_success(full, DenseVector(4).span(), 0.5), std::invalid_argument);
  CHECK_THROWS_AS(embedding_success(full, v.span(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(embedding_success(full, v.span(), 1.0), std::invalid_argument);
}

TEST_CASE("embedding_success: Haar frequency matches the Beta-tail probability") {
  const std::size_t draws = 100000;
  RngStream rng(14, 0);
  const DenseVector e1 = DenseVector::basis(100, 0);
  std::size_t hits = 0;
  for (std::size_t n = 0; n < draws; ++n) hits += embedding_success(sample_haar(rng, 100, 10), e1.span(), 0.5);
  const double delta = embedding_probability(100, 10, 0.5);
  const double sigma = std::sqrt(delta * (1 - delta) / draws);
  CHECK(std::abs(static_cast<double>(hits) / draws - delta) <= 3.0 * sigma);
}

TEST_CASE("samplers: shape errors, determinism, names") {
  RngStream rng(15, 0);
  for (Scheme s : {Scheme::haar, Scheme::coordinate, Scheme::gaussian_iid}) {
    CHECK_THROWS_AS(sample_directions(s, rng, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS(sample_directions(s, rng, 5, 6), std::invalid_argument);
    RngStream a(99, 1);
    RngStream b(99, 1);
    CHECK(sample_directions(s, a, 12, 3).matrix() == sample_directions(s, b, 12, 3).matrix());
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK_FALSE(parse_scheme("sobol").has_value());
}
