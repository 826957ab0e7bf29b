#include <gtest/gtest.h>

#include "rachsim/numerology.hpp"

using namespace rachsim;

namespace {

const SubcarrierSpacing kSpacings[] = {SubcarrierSpacing::k15, SubcarrierSpacing::k30, SubcarrierSpacing::k60,
                                       SubcarrierSpacing::k120};
const SlotSymbols kSymbols[] = {SlotSymbols::k7, SlotSymbols::k4, SlotSymbols::k2};

}  // namespace

TEST(TimeScale, Baseline) { EXPECT_DOUBLE_EQ(time_scale({}), 1.0); }

TEST(TimeScale, SixtyKilohertz) {
  EXPECT_DOUBLE_EQ(time_scale({SubcarrierSpacing::k60, SlotSymbols::k7}), 0.25);
}

TEST(TimeScale, TwoSymbolMiniSlot) {
  const TimeScale s = time_scale_ratio({SubcarrierSpacing::k15, SlotSymbols::k2});
  EXPECT_EQ(s.num, 2);
  EXPECT_EQ(s.den, 7);
  EXPECT_NEAR(s.value(), 0.2857, 1e-4);
}

TEST(TimeScale, InUnitIntervalOverGrid) {
  for (auto scs : kSpacings)
    for (auto sym : kSymbols) {
      const double v = time_scale({scs, sym});
      EXPECT_GT(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
}

TEST(TimeScale, StrictlyDecreasingAlongRowsAndColumns) {
  for (auto sym : kSymbols)
    for (int i = 1; i < 4; ++i)
      EXPECT_LT(time_scale({kSpacings[i], sym}), time_scale({kSpacings[i - 1], sym}));
  for (auto scs : kSpacings)
    for (int j = 1; j < 3; ++j)
      EXPECT_LT(time_scale({scs, kSymbols[j]}), time_scale({scs, kSymbols[j - 1]}));
}

TEST(TimeScale, IntegerMillisecondsMapToWholeTicks) {
  // The clock granularity is chosen so this is exact for every numerology.
  for (auto scs : kSpacings)
    for (auto sym : kSymbols) {
      const TimeScale s = time_scale_ratio({scs, sym});
      for (int ms = 1; ms <= 80; ++ms) EXPECT_EQ((ms * s.num * kTicksPerMs) % s.den, 0) << ms;
    }
}

TEST(ScaleTiming, DefaultsUnchangedAtBaseline) { EXPECT_EQ(scale_timing(TimingParams{}, Numerology{}), TimingParams{}); }

TEST(ScaleTiming, Msg2AtThirtyKilohertz) {
  const TimingParams t = scale_timing({}, {SubcarrierSpacing::k30, SlotSymbols::k7});
  EXPECT_DOUBLE_EQ(t.t_msg2_ms, 1.5);
}

TEST(ScaleTiming, RaPeriodAtFastestNumerology) {
  const TimingParams t = scale_timing({}, {SubcarrierSpacing::k120, SlotSymbols::k2});
  EXPECT_NEAR(t.ra_period_ms, 0.1786, 1e-4);
  EXPECT_DOUBLE_EQ(t.ra_period_ms, 5.0 / 28.0);
}

TEST(ScaleTiming, PreservesOrdering) {
  const TimingParams base{};
  for (auto scs : kSpacings)
    for (auto sym : kSymbols) {
      const TimingParams t = scale_timing(base, {scs, sym});
      EXPECT_LT(t.t_msg1_ms, t.t_msg2_ms);
      EXPECT_LT(t.t_msg2_ms, t.t_msg3_ms);
      EXPECT_DOUBLE_EQ(t.t_msg3_ms, t.t_msg4_ms);
      EXPECT_LT(t.bi_max_ms, t.contention_resolution_timer_ms);
      EXPECT_LT(t.contention_resolution_timer_ms, t.sib2_period_ms);
    }
}

TEST(TickTiming, BaselineTicks) {
  const TickTiming t = tick_timing({}, {});
  EXPECT_EQ(t.subframe, 56);
  EXPECT_EQ(t.ra_period, 5 * 56);
  EXPECT_EQ(t.contention_resolution, 48 * 56);
}

TEST(Numerology, RejectsUnknownValues) {
  EXPECT_THROW(spacing_from_khz(45), std::invalid_argument);
  EXPECT_THROW(symbols_from_count(3), std::invalid_argument);
  EXPECT_EQ(spacing_from_khz(120), SubcarrierSpacing::k120);
  EXPECT_EQ(symbols_from_count(4), SlotSymbols::k4);
}

TEST(Time, CeilToPeriod) {
  EXPECT_EQ(ceil_to_period(0, 280), 0);
  EXPECT_EQ(ceil_to_period(1, 280), 280);
  EXPECT_EQ(ceil_to_period(280, 280), 280);
  EXPECT_EQ(ceil_to_period(281, 280), 560);
}
