#pragma once

#include <array>
#include <cstdint>

namespace polyaflow {

/// Philox2x64-10 block cipher. Counter-based: block k of stream s under key
/// `seed` is philox2x64(counter = {k, s}, key = seed), so distinct
/// (seed, stream) pairs never share blocks and draws are bit-identical on
/// every platform.
std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> counter, std::uint64_t key);

inline constexpr const char* kRngAlgorithm = "philox2x64-10";

class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1) with 53-bit resolution.
  double uniform();
  double standard_normal();
  double exponential();

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
};

}  // namespace polyaflow
