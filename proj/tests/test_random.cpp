#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rachsim/random.hpp"

using namespace rachsim;

TEST(RandomSource, SameSeedSameStream) {
  const RandomSource a(42), b(42);
  auto x = a.stream(Stream::preamble, {7, 1, 0});
  auto y = b.stream(Stream::preamble, {7, 1, 0});
  for (int i = 0; i < 100; ++i) EXPECT_EQ(x(), y());
}

TEST(RandomSource, StreamsAreIndependentOfConsumption) {
  const RandomSource src(9);
  std::vector<std::uint64_t> ref;
  {
    auto d = src.stream(Stream::detection, {3});
    for (int i = 0; i < 16; ++i) ref.push_back(d());
  }
  auto other = src.stream(Stream::backoff, {3});
  for (int i = 0; i < 10000; ++i) other();
  auto d = src.stream(Stream::detection, {3});
  for (int i = 0; i < 16; ++i) EXPECT_EQ(d(), ref[static_cast<std::size_t>(i)]);
}

TEST(RandomSource, DistinctNamesAndPathsDiffer) {
  const RandomSource src(1);
  EXPECT_NE(src.stream(Stream::preamble, {1})(), src.stream(Stream::detection, {1})());
  EXPECT_NE(src.stream(Stream::preamble, {1, 2})(), src.stream(Stream::preamble, {2, 1})());
  EXPECT_NE(RandomSource(1).stream(Stream::harq)(), RandomSource(2).stream(Stream::harq)());
}

TEST(RandomSource, Uniform01Moments) {
  auto eng = RandomSource(5).stream(Stream::arrivals);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double u = uniform01(eng);
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    sum += u;
    sq += u * u;
  }
  EXPECT_NEAR(sum / n, 0.5, 0.005);
  EXPECT_NEAR(sq / n - (sum / n) * (sum / n), 1.0 / 12.0, 0.002);
}

TEST(RandomSource, UniformBelowCoversRange) {
  auto eng = RandomSource(5).stream(Stream::preamble);
  std::vector<int> hist(54, 0);
  const int n = 540000;
  for (int i = 0; i < n; ++i) {
    const auto v = uniform_below(eng, 54);
    ASSERT_LT(v, 54u);
    ++hist[v];
  }
  // Chi-square with 53 degrees of freedom; 99.9% quantile is about 90.6.
  double chi2 = 0.0;
  for (int h : hist) chi2 += (h - 10000.0) * (h - 10000.0) / 10000.0;
  EXPECT_LT(chi2, 90.6);
}
