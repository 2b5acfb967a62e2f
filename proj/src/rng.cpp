#include "polyaflow/rng.hpp"

#include <cmath>
#include <numbers>

namespace polyaflow {

namespace {

constexpr std::uint64_t kPhiloxM = 0xD2B74407B1CE6E93ULL;
constexpr std::uint64_t kPhiloxW = 0x9E3779B97F4A7C15ULL;

}  // namespace

std::array<std::uint64_t, 2> philox2x64(std::array<std::uint64_t, 2> ctr, std::uint64_t key) {
  for (int round = 0; round < 10; ++round) {
    const unsigned __int128 prod = static_cast<unsigned __int128>(kPhiloxM) * ctr[0];
    const auto hi = static_cast<std::uint64_t>(prod >> 64);
    const auto lo = static_cast<std::uint64_t>(prod);
    ctr = {hi ^ key ^ ctr[1], lo};
    key += kPhiloxW;
  }
  return ctr;
}

std::uint64_t RngStream::next_u64() {
  if (buffered_ == 0) {
    buffer_ = philox2x64({block_++, stream_}, seed_);
    buffered_ = 2;
  }
  return buffer_[2 - buffered_--];
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double RngStream::standard_normal() {
  const double r = std::sqrt(-2.0 * std::log(uniform()));
  return r * std::cos(2.0 * std::numbers::pi * uniform());
}

double RngStream::exponential() { return -std::log(uniform()); }

}  // namespace polyaflow
