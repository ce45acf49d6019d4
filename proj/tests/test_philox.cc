#include <gtest/gtest.h>

#include <cmath>

#include "slq/philox.h"

namespace slq {
namespace {

// Known-answer vectors of the reference Philox4x32-10 implementation.
TEST(Philox4x32, KnownAnswers) {
  using C = Philox4x32::Counter;
  EXPECT_EQ(Philox4x32::Block({0, 0, 0, 0}, {0, 0}),
            (C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(Philox4x32::Block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff},
                              {0xffffffff, 0xffffffff}),
            (C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(Philox4x32::Block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344},
                              {0xa4093822, 0x299f31d0}),
            (C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

// For z > 0 the reference p is rounded near 1, which alone moves z by about
// eps/density(z); the tolerance carries that term.
TEST(NormalQuantile, MatchesComplementaryErrorFunction) {
  for (double z = -8.0; z <= 8.0; z += 0.01) {
    const double p = 0.5 * std::erfc(-z / std::sqrt(2.0));
    const double density = std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI);
    const double tol = 1e-12 * (1.0 + std::abs(z)) +
                       (z > 0.0 ? 2.0 * 0x1.0p-53 / density : 0.0);
    EXPECT_NEAR(NormalQuantile(p), z, tol) << z;
  }
  EXPECT_EQ(NormalQuantile(0.5), 0.0);
}

TEST(NormalStream, MomentsOfStandardNormal) {
  const NormalStream s(42, 3);
  const int pairs = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int k = 0; k < pairs; ++k) {
    double z[2];
    s.Pair(k, z);
    for (double x : z) {
      m1 += x;
      m2 += x * x;
      m4 += x * x * x * x;
    }
  }
  const double N = 2.0 * pairs;
  EXPECT_NEAR(m1 / N, 0.0, 4.0 / std::sqrt(N));
  EXPECT_NEAR(m2 / N, 1.0, 4.0 * std::sqrt(2.0 / N));
  EXPECT_NEAR(m4 / N, 3.0, 4.0 * std::sqrt(96.0 / N));
}

TEST(NormalStream, StreamsAreRandomAccessAndDistinct) {
  const NormalStream a(7, 0), b(7, 1), c(8, 0);
  double z1[2], z2[2], z3[2], z4[2];
  a.Pair(1000, z1);
  a.Pair(1000, z2);
  EXPECT_EQ(z1[0], z2[0]);
  EXPECT_EQ(z1[1], z2[1]);
  b.Pair(1000, z3);
  c.Pair(1000, z4);
  EXPECT_NE(z1[0], z3[0]);
  EXPECT_NE(z1[0], z4[0]);
}

}  // namespace
}  // namespace slq
