#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "meanfield/rng.hpp"

namespace meanfield {
namespace {

using Counter = Philox4x32::Counter;
using Key = Philox4x32::Key;

// Published known-answer vectors for Philox4x32-10.
TEST(Philox, KnownAnswers) {
  EXPECT_EQ(Philox4x32::generate(Counter{0, 0, 0, 0}, Key{0, 0}),
            (Counter{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::generate(Counter{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, Key{0xffffffff, 0xffffffff}),
            (Counter{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::generate(Counter{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, Key{0xa4093822, 0x299f31d0}),
            (Counter{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(GaussianSource, SameCoordinatesSameDraws) {
  const GaussianSource a(42), b(42);
  std::vector<double> x(7), y(7);
  a.fill(x, 3, 10, 2);
  b.fill(y, 3, 10, 2);
  EXPECT_EQ(x, y);
}

TEST(GaussianSource, CoordinatesSeparateStreams) {
  const GaussianSource src(42);
  std::vector<double> base(4), other(4);
  src.fill(base, 3, 10, 2);
  for (auto variant : {0, 1, 2, 3, 4}) {
    switch (variant) {
      case 0: src.fill(other, 4, 10, 2); break;
      case 1: src.fill(other, 3, 11, 2); break;
      case 2: src.fill(other, 3, 10, 3); break;
      case 3: src.fill(other, 3, 10, 2, NoiseDomain::kInitialState); break;
      case 4: GaussianSource(43).fill(other, 3, 10, 2); break;
    }
    EXPECT_NE(base, other) << variant;
  }
}

TEST(GaussianSource, PrefixStable) {
  // A longer request extends a shorter one rather than reshuffling it.
  const GaussianSource src(9);
  std::vector<double> short_draw(3), long_draw(11);
  src.fill(short_draw, 0, 0, 1);
  src.fill(long_draw, 0, 0, 1);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(short_draw[i], long_draw[i]);
}

TEST(GaussianSource, MomentsMatchStandardNormal) {
  const GaussianSource src(2024);
  const int n = 200000;
  std::vector<double> z(n);
  src.fill(z, 0, 0, 1, NoiseDomain::kAuxiliary);
  double m1 = 0, m2 = 0, m4 = 0;
  for (double v : z) {
    m1 += v;
    m2 += v * v;
    m4 += v * v * v * v;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  EXPECT_LT(std::abs(m1), 4.0 / std::sqrt(n));
  EXPECT_LT(std::abs(m2 - 1.0), 4.0 * std::sqrt(2.0 / n));
  EXPECT_LT(std::abs(m4 - 3.0), 4.0 * std::sqrt(96.0 / n));
}

TEST(GaussianSource, UniformsInOpenInterval) {
  const GaussianSource src(5);
  std::vector<double> u(50000);
  src.fill_uniform(u, 1, 2, 3, NoiseDomain::kAuxiliary);
  double mean = 0;
  for (double v : u) {
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    mean += v;
  }
  mean /= u.size();
  EXPECT_NEAR(mean, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / u.size()));
}

}  // namespace
}  // namespace meanfield
