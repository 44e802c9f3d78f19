#include "ssd/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ssd {

std::string_view to_string(Backend b) {
  switch (b) {
    case Backend::analytic:
      return "analytic";
    case Backend::dual_ad:
      return "dual-ad";
    case Backend::finite_difference:
      return "finite-difference";
  }
  return "unknown";
}

std::optional<Backend> parse_backend(std::string_view name) {
  if (name == "analytic") return Backend::analytic;
  if (name == "dual-ad") return Backend::dual_ad;
  if (name == "finite-difference") return Backend::finite_difference;
  return std::nullopt;
}

ObjectiveOracle::ObjectiveOracle(std::shared_ptr<const Objective> objective, Backend backend,
                                 std::optional<double> fd_step)
    : objective_(std::move(objective)), backend_(backend), fd_step_(fd_step) {
  if (!objective_) throw std::invalid_argument("ObjectiveOracle: null objective");
  if (fd_step_ && !(*fd_step_ > 0.0)) throw std::invalid_argument("ObjectiveOracle: finite-difference step must be positive");
}

void ObjectiveOracle::check_dim(std::size_t n) const {
  if (n != dim()) throw DimensionError("ObjectiveOracle: dimension mismatch");
}

double ObjectiveOracle::counted_value(std::span<const double> x) {
  ++evaluations_;
  ++fevals_;
  const double f = objective_->value(x);
  if (!std::isfinite(f)) throw DomainError("objective is not finite at the requested point");
  return f;
}

double ObjectiveOracle::value(std::span<const double> x) {
  check_dim(x.size());
  return counted_value(x);
}

double ObjectiveOracle::fd_step_at(std::span<const double> x) const {
  if (fd_step_) return *fd_step_;
  return 1e-6 * std::max(1.0, norm2(x));
}

DenseVector ObjectiveOracle::subspace_gradient(std::span<const double> x, const DenseMatrix& p) {
  check_dim(x.size());
  if (p.rows() != dim()) throw DimensionError("subspace_gradient: P has wrong row count");
  const std::size_t ell = p.cols();
  DenseVector out(ell);

  switch (backend_) {
    case Backend::analytic: {
      DenseVector g(dim());
      objective_->gradient(x, g.span());
      ++evaluations_;
      fevals_ += dim() + 1;
      return matTvec(p, g.span());
    }
    case Backend::dual_ad: {
      std::vector<Dual> seeded(dim());
      for (std::size_t j = 0; j < ell; ++j) {
        const auto dir = p.column(j);
        for (std::size_t i = 0; i < dim(); ++i) seeded[i] = Dual{x[i], dir[i]};
        const Dual f = objective_->value(std::span<const Dual>(seeded));
        ++evaluations_;
        ++fevals_;
        if (!std::isfinite(f.tangent)) throw DomainError("directional derivative is not finite");
        out[j] = f.tangent;
      }
      return out;
    }
    case Backend::finite_difference: {
      const double h = fd_step_at(x);
      const double base = counted_value(x);
      std::vector<double> shifted(x.begin(), x.end());
      for (std::size_t j = 0; j < ell; ++j) {
        const auto dir = p.column(j);
        for (std::size_t i = 0; i < dim(); ++i) shifted[i] = x[i] + h * dir[i];
        out[j] = (counted_value(shifted) - base) / h;
      }
      return out;
    }
  }
  return out;
}

DenseVector ObjectiveOracle::full_gradient(std::span<const double> x) {
  check_dim(x.size());
  const std::size_t d = dim();
  DenseVector g(d);
  switch (backend_) {
    case Backend::analytic:
      objective_->gradient(x, g.span());
      ++evaluations_;
      fevals_ += d + 1;
      return g;
    case Backend::dual_ad: {
      std::vector<Dual> seeded(d);
      for (std::size_t i = 0; i < d; ++i) seeded[i] = Dual{x[i], 0.0};
      for (std::size_t j = 0; j < d; ++j) {
        seeded[j].tangent = 1.0;
        g[j] = objective_->value(std::span<const Dual>(seeded)).tangent;
        seeded[j].tangent = 0.0;
      }
      evaluations_ += d;
      fevals_ += d + 1;
      return g;
    }
    case Backend::finite_difference: {
      const double h = fd_step_at(x);
      const double base = counted_value(x);
      std::vector<double> shifted(x.begin(), x.end());
      for (std::size_t j = 0; j < d; ++j) {
        shifted[j] = x[j] + h;
        g[j] = (counted_value(shifted) - base) / h;
        shifted[j] = x[j];
      }
      return g;
    }
  }
  return g;
}

double ObjectiveOracle::peek_value(std::span<const double> x) const {
  check_dim(x.size());
  return objective_->value(x);
}

DenseVector ObjectiveOracle::peek_gradient(std::span<const double> x) const {
  check_dim(x.size());
  DenseVector g(dim());
  objective_->gradient(x, g.span());
  return g;
}

}  // namespace ssd
