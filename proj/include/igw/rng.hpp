#pragma once

#include <array>
#include <cmath>
#include <cstdint>

namespace igw {

// Philox4x32-10 block function (Salmon et al. 2011 constants).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u, kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u, kW1 = 0xBB67AE85u;
  for (int r = 0; r < 10; ++r) {
    if (r > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = std::uint64_t(kM0) * ctr[0];
    const std::uint64_t p1 = std::uint64_t(kM1) * ctr[2];
    const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
    const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

// Independent stream addressed by (seed, replicate, substream). Same address,
// same numbers, on every platform.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint32_t replicate, std::uint32_t substream = 0)
      : key_{std::uint32_t(seed), std::uint32_t(seed >> 32)},
        replicate_(replicate),
        substream_(substream) {}

  std::uint64_t next_u64() {
    if (pos_ == 4) refill();
    const std::uint64_t hi = buf_[pos_], lo = buf_[pos_ + 1];
    pos_ += 2;
    ++draws_;
    return (hi << 32) | lo;
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

  std::uint64_t draws() const { return draws_; }

 private:
  void refill() {
    buf_ = philox4x32({std::uint32_t(block_), std::uint32_t(block_ >> 32), replicate_, substream_},
                      key_);
    ++block_;
    pos_ = 0;
  }

  std::array<std::uint32_t, 2> key_;
  std::uint32_t replicate_;
  std::uint32_t substream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buf_{};
  int pos_ = 4;
  std::uint64_t draws_ = 0;
};

namespace substream {
inline constexpr std::uint32_t shape = 0;
inline constexpr std::uint32_t lengths = 1;
inline constexpr std::uint32_t coloring = 2;
inline constexpr std::uint32_t auxiliary = 3;
}  // namespace substream

}  // namespace igw
