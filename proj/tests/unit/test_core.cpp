#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "haptic/core/error.hpp"
#include "haptic/core/format.hpp"
#include "haptic/core/random.hpp"
#include "haptic/core/types.hpp"
#include "haptic/core/units.hpp"

using namespace haptic;

TEST(Units, ReferenceConversions) {
  EXPECT_NEAR(psi_to_kpa(Pressure::psi(2.0)), 13.79, 0.005);
  EXPECT_EQ(psi_to_kpa(Pressure::psi(0.0)), 0.0);
  EXPECT_NEAR(psi_to_kpa(Pressure::psi(3.5)), 24.13, 0.005);
}

TEST(Units, RoundTrip) {
  Rng rng(Seed{11});
  for (int i = 0; i < 1000; ++i) {
    const double p = rng.uniform(-1e3, 1e3);
    EXPECT_NEAR(kpa_to_psi(psi_to_kpa(Pressure::psi(p))), p, 1e-9);
  }
}

TEST(Units, RejectsNonFinite) {
  EXPECT_THROW(Pressure::psi(std::numeric_limits<double>::quiet_NaN()), Error);
  EXPECT_THROW(Pressure::psi(std::numeric_limits<double>::infinity()), Error);
}

TEST(Units, Literals) {
  using namespace haptic::literals;
  EXPECT_EQ(2.5_psi, Pressure::psi(2.5));
  EXPECT_EQ(3_psi, Pressure::psi(3.0));
  EXPECT_TRUE(Pressure::psi(3.5).in_display_range());
  EXPECT_FALSE(Pressure::psi(3.51).in_display_range());
}

TEST(Uncertainty, Clamp) {
  EXPECT_EQ(clamp_uncertainty(0.5).value(), 0.5);
  EXPECT_EQ(clamp_uncertainty(-0.2).value(), 0.0);
  EXPECT_EQ(clamp_uncertainty(1.7).value(), 1.0);
  EXPECT_THROW(clamp_uncertainty(std::numeric_limits<double>::quiet_NaN()), Error);
  EXPECT_DOUBLE_EQ(clamp_uncertainty(0.25).percent(), 25.0);
}

TEST(Pose, PathParameterRange) {
  EXPECT_NO_THROW(Pose(Vec2{0.1, 0.2}, 0.0));
  EXPECT_NO_THROW(Pose(Vec2{0.1, 0.2}, 1.0));
  EXPECT_THROW(Pose(Vec2{}, -0.01), Error);
  EXPECT_THROW(Pose(Vec2{}, 1.01), Error);
}

TEST(Random, SameSeedSameStream) {
  Rng a(Seed{42});
  Rng b(Seed{42});
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(a(), b());
}

TEST(Random, SplitIgnoresParentDraws) {
  Rng a(Seed{5});
  Rng b(Seed{5});
  for (int i = 0; i < 17; ++i) (void)b();
  Rng ca = a.split(streams::sensor);
  Rng cb = b.split(streams::sensor);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(ca(), cb());
}

TEST(Random, StreamsDiffer) {
  Rng a = Rng(Seed{5}).split(streams::sensor);
  Rng b = Rng(Seed{5}).split(streams::demos);
  int same = 0;
  for (int i = 0; i < 100; ++i) same += a() == b() ? 1 : 0;
  EXPECT_LT(same, 2);
}

TEST(Format, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(-0.0), "0");
  double v = 0.0;
  ASSERT_TRUE(parse_double(format_double(1.0 / 3.0), v));
  EXPECT_EQ(v, 1.0 / 3.0);
  EXPECT_FALSE(parse_double("1.5x", v));
  long long n = 0;
  EXPECT_TRUE(parse_int(" 42 ", n));
  EXPECT_EQ(n, 42);
  EXPECT_EQ(trim("  a b \t"), "a b");
}

TEST(Error, CarriesCode) {
  try {
    throw Error(ErrorCode::no_information, "nothing");
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::no_information);
    EXPECT_EQ(std::string(to_string(e.code())), "no_information");
  }
}
