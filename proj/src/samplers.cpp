#include "ssd/samplers.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ssd {
namespace {

void check_shape(std::size_t d, std::size_t ell) {
  if (ell < 1 || ell > d) throw std::invalid_argument("sampler: need 1 <= ell <= d");
}

}  // namespace

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::haar:
      return "haar";
    case Scheme::coordinate:
      return "coordinate";
    case Scheme::gaussian_iid:
      return "gaussian-iid";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  if (name == "haar") return Scheme::haar;
  if (name == "coordinate") return Scheme::coordinate;
  if (name == "gaussian-iid") return Scheme::gaussian_iid;
  return std::nullopt;
}

DirectionMatrix sample_haar(RngStream& rng, std::size_t d, std::size_t ell) {
  check_shape(d, ell);
  QrResult qr = qr_thin(gaussian_matrix(rng, d, ell));
  const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(ell));
  for (double& v : qr.q.data()) v *= scale;
  return {std::move(qr.q), Scheme::haar};
}

DirectionMatrix sample_coordinate(RngStream& rng, std::size_t d, std::size_t ell) {
  check_shape(d, ell);
  std::vector<std::size_t> perm(d);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  // partial Fisher-Yates: the first ell slots are a uniform ell-subset
  for (std::size_t i = 0; i < ell; ++i) {
    const std::size_t j = i + rng.uniform_index(d - i);
    std::swap(perm[i], perm[j]);
  }
  perm.resize(ell);

  const double scale = std::sqrt(static_cast<double>(d) / static_cast<double>(ell));
  DenseMatrix p(d, ell);
  for (std::size_t j = 0; j < ell; ++j) p(perm[j], j) = scale;
  return {std::move(p), Scheme::coordinate, std::move(perm)};
}

DirectionMatrix sample_gaussian_iid(RngStream& rng, std::size_t d, std::size_t ell) {
  check_shape(d, ell);
  DenseMatrix p = gaussian_matrix(rng, d, ell);
  const double scale = 1.0 / std::sqrt(static_cast<double>(ell));
  for (double& v : p.data()) v *= scale;
  return {std::move(p), Scheme::gaussian_iid};
}

DirectionMatrix sample_directions(Scheme scheme, RngStream& rng, std::size_t d, std::size_t ell) {
  switch (scheme) {
    case Scheme::haar:
      return sample_haar(rng, d, ell);
    case Scheme::coordinate:
      return sample_coordinate(rng, d, ell);
    case Scheme::gaussian_iid:
      return sample_gaussian_iid(rng, d, ell);
  }
  throw std::invalid_argument("sample_directions: unknown scheme");
}

double embedded_squared_norm(const DirectionMatrix& p, std::span<const double> v) {
  return squared_norm(matTvec(p.matrix(), v).span());
}

bool embedding_success(const DirectionMatrix& p, std::span<const double> v, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw std::invalid_argument("embedding_success: eps must lie in (0, 1)");
  const double vv = squared_norm(v);
  if (vv == 0.0) throw std::invalid_argument("embedding_success: zero vector");
  return embedded_squared_norm(p, v) >= (1.0 - eps) * vv;
}

}  // namespace ssd
