#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "ssd/linalg.hpp"
#include "ssd/rng.hpp"

namespace ssd {

enum class Scheme {
  haar,          // sqrt(d/l) times l columns of a Haar orthogonal matrix
  coordinate,    // sqrt(d/l) times l distinct identity columns
  gaussian_iid,  // iid N(0, I_d) columns scaled by 1/sqrt(l); baseline only
};

std::string_view to_string(Scheme s);
std::optional<Scheme> parse_scheme(std::string_view name);

/// A d x l random direction matrix. Haar and coordinate draws satisfy
/// E[P P^T] = I and P^T P = (d/l) I; gaussian-iid only the first.
class DirectionMatrix {
 public:
  DirectionMatrix(DenseMatrix p, Scheme scheme, std::vector<std::size_t> columns = {})
      : p_(std::move(p)), scheme_(scheme), columns_(std::move(columns)) {}

  const DenseMatrix& matrix() const { return p_; }
  Scheme scheme() const { return scheme_; }
  std::size_t dim() const { return p_.rows(); }
  std::size_t ell() const { return p_.cols(); }
  /// Selected identity columns (coordinate scheme only, in draw order).
  const std::vector<std::size_t>& columns() const { return columns_; }
  /// False for the gaussian-iid baseline.
  bool is_isotropic_frame() const { return scheme_ != Scheme::gaussian_iid; }

 private:
  DenseMatrix p_;
  Scheme scheme_;
  std::vector<std::size_t> columns_;
};

DirectionMatrix sample_haar(RngStream& rng, std::size_t d, std::size_t ell);
DirectionMatrix sample_coordinate(RngStream& rng, std::size_t d, std::size_t ell);
DirectionMatrix sample_gaussian_iid(RngStream& rng, std::size_t d, std::size_t ell);
DirectionMatrix sample_directions(Scheme scheme, RngStream& rng, std::size_t d, std::size_t ell);

/// ||P^T v||^2
double embedded_squared_norm(const DirectionMatrix& p, std::span<const double> v);

/// True iff ||P^T v||^2 >= (1 - eps) ||v||^2. Throws on v = 0 or eps outside (0, 1).
bool embedding_success(const DirectionMatrix& p, std::span<const double> v, double eps);

}  // namespace ssd
