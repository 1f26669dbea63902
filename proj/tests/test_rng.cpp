#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "igw/rng.hpp"

using namespace igw;

// Known-answer vectors for Philox4x32-10 from the Random123 distribution.
TEST(Philox, KnownAnswerZero) {
  const auto r = philox4x32({0, 0, 0, 0}, {0, 0});
  EXPECT_EQ(r[0], 0x6627e8d5u);
  EXPECT_EQ(r[1], 0xe169c58du);
  EXPECT_EQ(r[2], 0xbc57ac4cu);
  EXPECT_EQ(r[3], 0x9b00dbd8u);
}

TEST(Philox, KnownAnswerOnes) {
  const auto r = philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, {0xffffffffu, 0xffffffffu});
  EXPECT_EQ(r[0], 0x408f276du);
  EXPECT_EQ(r[1], 0x41c83b0eu);
  EXPECT_EQ(r[2], 0xa20bc7c6u);
  EXPECT_EQ(r[3], 0x6d5451fdu);
}

TEST(Philox, KnownAnswerPi) {
  const auto r = philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u}, {0xa4093822u, 0x299f31d0u});
  EXPECT_EQ(r[0], 0xd16cfe09u);
  EXPECT_EQ(r[1], 0x94fdccebu);
  EXPECT_EQ(r[2], 0x5001e420u);
  EXPECT_EQ(r[3], 0x24126ea1u);
}

TEST(Stream, SameAddressSameNumbers) {
  Stream a(42, 7, substream::shape), b(42, 7, substream::shape);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a.next_u64(), b.next_u64());
  EXPECT_EQ(a.draws(), 1000u);
}

TEST(Stream, AddressesAreIndependent) {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {1ull, 2ull, 1ull << 40})
    for (std::uint32_t rep : {0u, 1u, 1000u})
      for (std::uint32_t sub : {substream::shape, substream::lengths, substream::coloring})
        firsts.insert(Stream(seed, rep, sub).next_u64());
  EXPECT_EQ(firsts.size(), 27u);
}

TEST(Stream, UniformMoments) {
  Stream s(3, 0);
  const int n = 200000;
  double m1 = 0.0, m2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    m1 += u;
    m2 += u * u;
  }
  EXPECT_NEAR(m1 / n, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(m2 / n, 1.0 / 3, 5 * std::sqrt(4.0 / 45 / n));
}

TEST(Stream, ExponentialMean) {
  Stream s(5, 1, substream::lengths);
  const int n = 200000;
  const double rate = 2.5;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.exponential(rate);
    ASSERT_GT(x, 0.0);
    sum += x;
  }
  EXPECT_NEAR(sum / n, 1.0 / rate, 5.0 / rate / std::sqrt(double(n)));
}
