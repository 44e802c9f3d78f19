#include "ssd/rng.hpp"

#include <boost/random/normal_distribution.hpp>
#include <cmath>

namespace ssd {
using detail::kGolden;
using detail::mix64;

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed), stream_id_(stream_id), key_(mix64(mix64(seed + kGolden) ^ mix64(~stream_id * kGolden + 1))) {}

double RngStream::uniform() {
  // (k + 0.5) / 2^53 never hits 0 or 1
  const std::uint64_t k = (*this)() >> 11;
  return (static_cast<double>(k) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_index(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("uniform_index: bound must be positive");
  __uint128_t m = static_cast<__uint128_t>((*this)()) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = (0 - bound) % bound;
    while (low < threshold) {
      m = static_cast<__uint128_t>((*this)()) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::gaussian() {
  // ziggurat; stateless, so a stream's n-th variate depends only on its counter
  return boost::random::normal_distribution<double>{}(*this);
}

DenseMatrix gaussian_matrix(RngStream& rng, std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) throw DimensionError("gaussian_matrix: dimensions must be positive");
  DenseMatrix z(rows, cols);
  for (double& v : z.data()) v = rng.gaussian();
  return z;
}

}  // namespace ssd
