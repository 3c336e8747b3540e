#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "gahmm/text_util.hpp"

using namespace gahmm;

TEST(TextUtil, TrimAndSplit) {
  EXPECT_EQ(text::trim("  a b \t\r\n"), "a b");
  EXPECT_EQ(text::trim(""), "");
  const auto parts = text::split("a,,b", ',');
  ASSERT_EQ(parts.size(), 3u);
  EXPECT_EQ(parts[1], "");
  const auto ws = text::split_ws("  x \t y\nz ");
  ASSERT_EQ(ws.size(), 3u);
  EXPECT_EQ(ws[2], "z");
}

TEST(TextUtil, LinesHandlesCarriageReturnsAndTrailingNewline) {
  const auto ls = text::lines("a\r\nb\n\nc\n");
  ASSERT_EQ(ls.size(), 4u);
  EXPECT_EQ(ls[0], "a");
  EXPECT_EQ(ls[2], "");
  EXPECT_EQ(ls[3], "c");
}

TEST(TextUtil, StrictNumericParsing) {
  EXPECT_EQ(text::parse_int("+42"), 42);
  EXPECT_EQ(text::parse_int("-7"), -7);
  EXPECT_FALSE(text::parse_int("4x"));
  EXPECT_FALSE(text::parse_int(""));
  EXPECT_DOUBLE_EQ(*text::parse_double("0.25"), 0.25);
  EXPECT_FALSE(text::parse_double("0.25abc"));
  EXPECT_FALSE(text::parse_double(""));
}

TEST(TextUtil, FormatDoubleRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(rng) / (1 + i);
    EXPECT_EQ(*text::parse_double(text::format_double(v)), v);
  }
}

TEST(TextUtil, ToLower) { EXPECT_EQ(text::to_lower("Hand_Shaking-2"), "hand_shaking-2"); }
