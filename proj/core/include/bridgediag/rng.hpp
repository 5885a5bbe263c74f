#pragma once

#include <array>
#include <cstdint>

namespace bridgediag {

/// Philox4x32-10 block function. Exposed for known-answer testing.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based random stream.
///
/// The 64-bit seed is the Philox key; the stream id occupies the upper half of
/// the 128-bit counter and the draw index the lower half. A given
/// (seed, stream_id) therefore always yields the same sequence no matter which
/// thread consumes it, and distinct stream ids never share counter values.
/// Replicate r of a bootstrap uses stream id r.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_id_; }

  /// Child stream keyed by (this stream's identity, child). Children of
  /// different parents, or different children of one parent, do not overlap.
  RngStream derive(std::uint64_t child) const noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  /// Standard normal (Box-Muller, pairs cached).
  double normal() noexcept;
  /// Gamma(shape, 1), Marsaglia-Tsang.
  double gamma(double shape) noexcept;
  double chi_square(double dof) noexcept { return 2.0 * gamma(0.5 * dof); }
  /// Uniform integer in [0, n), unbiased. n must be positive.
  std::uint64_t uniform_index(std::uint64_t n) noexcept;

 private:
  void refill() noexcept;

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffer_pos_ = 4;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace bridgediag
