#pragma once

#include <cstdint>
#include <limits>

#include "ssd/linalg.hpp"

namespace ssd {

namespace detail {
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based random stream. The 64-bit key is derived from (seed,
/// stream_id); the n-th output is a SplitMix64 finalizer applied to
/// key + n * golden. Identical (seed, stream_id) replay bit-identically and
/// no state is shared between streams.
///
/// Satisfies UniformRandomBitGenerator so it also plugs into <random>.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), unbiased (Lemire's rejection method).
  std::uint64_t uniform_index(std::uint64_t bound);
  /// Standard normal (Boost's ziggurat sampler fed by this stream).
  double gaussian();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// rows x cols matrix of iid N(0,1) variates, filled column by column.
DenseMatrix gaussian_matrix(RngStream& rng, std::size_t rows, std::size_t cols);

}  // namespace ssd
