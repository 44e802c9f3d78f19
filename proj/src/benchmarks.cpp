#include "ssd/benchmarks.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "ssd/rng.hpp"

namespace ssd {
namespace {

class NesterovWorst final : public GenericObjective<NesterovWorst> {
 public:
  NesterovWorst(std::size_t d, std::size_t r, double lipschitz) : d_(d), r_(r), lipschitz_(lipschitz) {}

  std::size_t dim() const override { return d_; }

  template <class T>
  T evaluate(std::span<const T> x) const {
    if (x.size() != d_) throw DimensionError("nesterov_worst: dimension mismatch");
    T chain = x[0] * x[0];
    for (std::size_t i = 0; i + 1 < r_; ++i) {
      const T diff = x[i] - x[i + 1];
      chain += diff * diff;
    }
    chain += x[r_ - 1] * x[r_ - 1];
    return T(lipschitz_ * 0.25) * (chain * T(0.5) - x[0]);
  }

  void gradient(std::span<const double> x, std::span<double> g) const override {
    if (x.size() != d_ || g.size() != d_) throw DimensionError("nesterov_worst: dimension mismatch");
    const double c = lipschitz_ * 0.25;
    for (std::size_t i = 0; i < d_; ++i) g[i] = 0.0;
    for (std::size_t i = 0; i < r_; ++i) {
      double ax = 2.0 * x[i];
      if (i > 0) ax -= x[i - 1];
      if (i + 1 < r_) ax -= x[i + 1];
      g[i] = c * (ax - (i == 0 ? 1.0 : 0.0));
    }
  }

 private:
  std::size_t d_;
  std::size_t r_;
  double lipschitz_;
};

class DiagonalQuadratic final : public GenericObjective<DiagonalQuadratic> {
 public:
  explicit DiagonalQuadratic(std::vector<double> diag) : diag_(std::move(diag)) {}

  std::size_t dim() const override { return diag_.size(); }

  template <class T>
  T evaluate(std::span<const T> x) const {
    if (x.size() != diag_.size()) throw DimensionError("quadratic: dimension mismatch");
    T s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += T(diag_[i]) * x[i] * x[i];
    return s * T(0.5);
  }

  void gradient(std::span<const double> x, std::span<double> g) const override {
    if (x.size() != diag_.size() || g.size() != diag_.size()) throw DimensionError("quadratic: dimension mismatch");
    for (std::size_t i = 0; i < x.size(); ++i) g[i] = diag_[i] * x[i];
  }

 private:
  std::vector<double> diag_;
};

class LeastSquares final : public GenericObjective<LeastSquares> {
 public:
  LeastSquares(DenseMatrix a, DenseVector b) : a_(std::move(a)), b_(std::move(b)) {}

  std::size_t dim() const override { return a_.cols(); }

  template <class T>
  T evaluate(std::span<const T> x) const {
    if (x.size() != a_.cols()) throw DimensionError("least_squares: dimension mismatch");
    std::vector<T> residual(a_.rows());
    for (std::size_t i = 0; i < a_.rows(); ++i) residual[i] = T(-b_[i]);
    for (std::size_t j = 0; j < a_.cols(); ++j) {
      const auto col = a_.column(j);
      for (std::size_t i = 0; i < a_.rows(); ++i) residual[i] += T(col[i]) * x[j];
    }
    T s = 0.0;
    for (const T& r : residual) s += r * r;
    return s;
  }

  void gradient(std::span<const double> x, std::span<double> g) const override {
    if (x.size() != a_.cols() || g.size() != a_.cols()) throw DimensionError("least_squares: dimension mismatch");
    DenseVector residual = matvec(a_, x);
    axpy(-1.0, b_.span(), residual.span());
    const DenseVector atr = matTvec(a_, residual.span());
    for (std::size_t j = 0; j < g.size(); ++j) g[j] = 2.0 * atr[j];
  }

 private:
  DenseMatrix a_;
  DenseVector b_;
};

}  // namespace

Benchmark nesterov_worst(std::size_t d, std::size_t r, double lipschitz) {
  if (r < 1 || r >= d) throw std::invalid_argument("nesterov_worst: need 1 <= r < d");
  if (!(lipschitz > 0.0)) throw std::invalid_argument("nesterov_worst: Lipschitz constant must be positive");

  DenseVector x_star(d);
  for (std::size_t i = 0; i < r; ++i)
    x_star[i] = 1.0 - static_cast<double>(i + 1) / static_cast<double>(r + 1);

  Benchmark b;
  b.name = "nesterov_worst";
  b.objective = std::make_shared<NesterovWorst>(d, r, lipschitz);
  b.f_star = -lipschitz * static_cast<double>(r) / (8.0 * static_cast<double>(r + 1));
  b.lambda = lipschitz;
  b.intrinsic_dim = r;
  // minimizers form x_star + span(e_{r+1}, ..., e_d)
  b.distance_to_solution = [x_star, r](std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < r; ++i) s += (x[i] - x_star[i]) * (x[i] - x_star[i]);
    return std::sqrt(s);
  };
  b.x_star = std::move(x_star);
  return b;
}

Benchmark quadratic(std::size_t d, double gamma, double lambda, Spectrum spectrum) {
  if (d < 1) throw std::invalid_argument("quadratic: d must be positive");
  if (!(gamma > 0.0 && gamma <= lambda)) throw std::invalid_argument("quadratic: need 0 < gamma <= lambda");

  std::vector<double> diag(d);
  for (std::size_t i = 0; i < d; ++i) {
    const double t = d == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(d - 1);
    diag[i] = spectrum == Spectrum::log_uniform ? gamma * std::pow(lambda / gamma, t) : gamma + t * (lambda - gamma);
  }
  // endpoints exact so the metadata is attained
  diag.front() = d == 1 ? lambda : gamma;
  diag.back() = lambda;

  Benchmark b;
  b.name = "quadratic";
  b.objective = std::make_shared<DiagonalQuadratic>(std::move(diag));
  b.f_star = 0.0;
  b.x_star = DenseVector(d);
  b.gamma = gamma;
  b.lambda = lambda;
  b.distance_to_solution = [](std::span<const double> x) { return norm2(x); };
  return b;
}

Benchmark rankdef_least_squares(std::size_t n, std::size_t d, std::size_t rank, std::uint64_t seed, double s_min,
                                double s_max) {
  if (rank < 1 || rank >= d || rank > n)
    throw std::invalid_argument("rankdef_least_squares: need 1 <= rank < d and rank <= n");
  if (!(s_min > 0.0 && s_min <= s_max)) throw std::invalid_argument("rankdef_least_squares: need 0 < s_min <= s_max");

  RngStream rng(seed, 0);
  const DenseMatrix u = qr_thin(gaussian_matrix(rng, n, rank)).q;
  const DenseMatrix v = qr_thin(gaussian_matrix(rng, d, rank)).q;

  DenseMatrix us = u;
  for (std::size_t k = 0; k < rank; ++k) {
    const double t = rank == 1 ? 0.0 : static_cast<double>(k) / static_cast<double>(rank - 1);
    const double sigma = s_max + t * (s_min - s_max);
    for (double& e : us.column(k)) e *= sigma;
  }
  DenseMatrix a = matmul(us, v.transpose());

  DenseVector x_gen(d);
  for (std::size_t i = 0; i < d; ++i) x_gen[i] = rng.gaussian();
  DenseVector b = matvec(a, x_gen.span());

  // minimum-norm minimizer: projection of x_gen onto row(A) = col(V)
  const DenseVector coeff = matTvec(v, x_gen.span());
  DenseVector x_min = matvec(v, coeff.span());

  Benchmark out;
  out.name = "rankdef_least_squares";
  out.objective = std::make_shared<LeastSquares>(std::move(a), std::move(b));
  out.f_star = 0.0;
  out.gamma = 2.0 * s_min * s_min;
  out.lambda = 2.0 * s_max * s_max;
  out.intrinsic_dim = rank;
  out.distance_to_solution = [v, x_min](std::span<const double> x) {
    DenseVector diff(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) diff[i] = x[i] - x_min[i];
    return norm2(matTvec(v, diff.span()).span());
  };
  out.x_star = std::move(x_min);
  return out;
}

}  // namespace ssd
