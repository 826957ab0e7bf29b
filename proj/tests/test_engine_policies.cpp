#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "rachsim/engine.hpp"

using namespace rachsim;

namespace {

const TickTiming kBase = tick_timing({}, {});

}  // namespace

TEST(Detection, FirstAttemptRate) {
  const RandomSource rng(1);
  const int n = 100000;
  int hits = 0;
  for (int k = 0; k < n; ++k) hits += draw_detection(rng, static_cast<std::uint64_t>(k), 1, 0, detection_probability(1));
  EXPECT_NEAR(static_cast<double>(hits) / n, 1.0 - std::exp(-1.0), 0.005);
}

TEST(Detection, TenthAttemptAlmostCertain) {
  const RandomSource rng(2);
  const int n = 100000;
  int hits = 0;
  for (int k = 0; k < n; ++k) hits += draw_detection(rng, static_cast<std::uint64_t>(k), 10, 0, detection_probability(10));
  EXPECT_GE(static_cast<double>(hits) / n, 0.9999);
  EXPECT_GE(detection_probability(10), 0.9999);
}

TEST(Detection, RateTracksModelForEveryAttempt) {
  const RandomSource rng(3);
  for (int i = 1; i <= 5; ++i) {
    const int n = 100000;
    int hits = 0;
    for (int k = 0; k < n; ++k) hits += draw_detection(rng, static_cast<std::uint64_t>(k), i, 0, detection_probability(i));
    EXPECT_NEAR(static_cast<double>(hits) / n, detection_probability(i), 0.005) << i;
  }
}

TEST(ResolveOpportunity, SharedPreambleCollides) {
  RaOpportunity o;
  o.tx = {{5, 0, DeviceClass::urllc}, {5, 1, DeviceClass::urllc}, {9, 2, DeviceClass::urllc}};
  const auto out = resolve_opportunity(o, [](std::size_t, const Transmission&) { return true; });
  EXPECT_EQ(out, (std::vector<AttemptOutcome>{AttemptOutcome::collided, AttemptOutcome::collided,
                                              AttemptOutcome::detected}));
}

TEST(ResolveOpportunity, DetectOnlyConsultedForSoleTransmitters) {
  RaOpportunity o;
  o.tx = {{1, 0, DeviceClass::urllc}, {2, 1, DeviceClass::urllc}, {1, 2, DeviceClass::urllc}, {3, 3, DeviceClass::urllc}};
  std::vector<std::size_t> asked;
  const auto out = resolve_opportunity(o, [&](std::size_t i, const Transmission& t) {
    asked.push_back(i);
    return t.preamble == 3;
  });
  EXPECT_EQ(asked, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(out[1], AttemptOutcome::undetected);
  EXPECT_EQ(out[3], AttemptOutcome::detected);
}

TEST(GrantRar, UnderCapacity) {
  std::vector<RarRequest> req;
  for (int p = 0; p < 5; ++p) req.push_back({p, 5});
  for (const auto& g : grant_rar(req, 12)) EXPECT_EQ(g, 0);
}

TEST(GrantRar, SpillsAcrossWindowSubframes) {
  std::vector<RarRequest> req;
  for (int p = 0; p < 30; ++p) req.push_back({29 - p, window_subframes(kBase.rar_window, kBase.subframe)});
  const auto g = grant_rar(req, 12);
  std::vector<int> per(5, 0);
  for (const auto& x : g) {
    ASSERT_TRUE(x);
    ++per[static_cast<std::size_t>(*x)];
  }
  EXPECT_EQ(per, (std::vector<int>{12, 12, 6, 0, 0}));
  // Preamble order decides who goes first.
  EXPECT_EQ(g[29], 0);  // preamble 0
  EXPECT_EQ(g[0], 2);   // preamble 29
}

TEST(GrantRar, ZeroWindowKeepsOneResponseSubframe) {
  EXPECT_EQ(window_subframes(0, kBase.subframe), 1);
  std::vector<RarRequest> req;
  for (int p = 0; p < 30; ++p) req.push_back({p, 1});
  const auto g = grant_rar(req, 12);
  int granted = 0;
  for (const auto& x : g) {
    if (x) {
      EXPECT_EQ(*x, 0);
      ++granted;
    }
  }
  EXPECT_EQ(granted, 12);
}

TEST(Harq, CleanExchangeTakesTenMilliseconds) {
  auto eng = RandomSource(1).stream(Stream::harq);
  const Msg34Result r = msg34_exchange({0.0, 5}, kBase, eng);
  EXPECT_TRUE(r.connected);
  EXPECT_EQ(r.msg3_tx, 1);
  EXPECT_EQ(r.msg4_tx, 1);
  EXPECT_EQ(r.duration, ms_to_ticks(10.0));
}

TEST(Harq, ExhaustedMsg3EndsAtTimerExpiry) {
  auto eng = RandomSource(1).stream(Stream::harq);
  const Msg34Result r = msg34_exchange({1.0, 5}, kBase, eng);
  EXPECT_FALSE(r.connected);
  EXPECT_EQ(r.msg3_tx, 5);
  EXPECT_EQ(r.msg4_tx, 0);
  EXPECT_EQ(r.duration, kBase.contention_resolution);
}

TEST(Harq, Msg3FailureProbability) {
  // P(Msg 3 fails) = q^5. With q = 0.1 that is 1e-5; check the law at q = 0.5
  // where it is measurable, then the exact value at q = 0.1.
  auto eng = RandomSource(4).stream(Stream::harq);
  const int n = 400000;
  int msg3_failed = 0, connected = 0;
  for (int i = 0; i < n; ++i) {
    const Msg34Result r = msg34_exchange({0.5, 5}, kBase, eng);
    msg3_failed += r.msg4_tx == 0;
    connected += r.connected;
  }
  EXPECT_NEAR(static_cast<double>(msg3_failed) / n, 1.0 / 32.0, 0.0015);
  // 5 + 5 transmissions span 50 ms and overrun the 48 ms timer.
  EXPECT_NEAR(static_cast<double>(connected) / n, (31.0 * 31.0 - 1.0) / 1024.0, 0.002);
  EXPECT_NEAR(std::pow(0.1, 5), 1e-5, 1e-18);
}

TEST(Harq, ProbabilityZeroAlwaysConnects) {
  auto eng = RandomSource(9).stream(Stream::harq);
  for (int i = 0; i < 1000; ++i) {
    const Msg34Result r = msg34_exchange({0.0, 5}, kBase, eng);
    EXPECT_TRUE(r.connected);
    EXPECT_EQ(r.msg3_tx + r.msg4_tx, 2);
  }
}

TEST(Backoff, EbfUrllcWaitsExactlyMsg2) {
  auto eng = RandomSource(1).stream(Stream::backoff);
  const BackoffPolicy p = backoff_policy(true, DeviceClass::urllc, kBase);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(schedule_backoff(1000, p, kBase, eng), 1000 + kBase.msg2);
}

TEST(Backoff, EbfNonUrllcDrawsUpToTenMilliseconds) {
  auto eng = RandomSource(1).stream(Stream::backoff);
  const BackoffPolicy p = backoff_policy(true, DeviceClass::non_urllc, kBase);
  double sum = 0.0;
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Tick extra = schedule_backoff(0, p, kBase, eng) - kBase.msg2;
    ASSERT_GE(extra, 0);
    ASSERT_LE(extra, ms_to_ticks(10.0));
    sum += ticks_to_ms(extra);
  }
  EXPECT_NEAR(sum / n, 5.0, 0.05);
}

TEST(Backoff, DefaultWindowPlusTwentyMilliseconds) {
  auto eng = RandomSource(1).stream(Stream::backoff);
  for (DeviceClass c : {DeviceClass::urllc, DeviceClass::non_urllc}) {
    const BackoffPolicy p = backoff_policy(false, c, kBase);
    EXPECT_EQ(p.rar_window, ms_to_ticks(5.0));
    EXPECT_EQ(p.bi_max, ms_to_ticks(20.0));
    double sum = 0.0;
    const int n = 50000;
    for (int i = 0; i < n; ++i) {
      const Tick extra = schedule_backoff(0, p, kBase, eng) - kBase.msg2 - p.rar_window;
      ASSERT_GE(extra, 0);
      ASSERT_LE(extra, ms_to_ticks(20.0));
      sum += ticks_to_ms(extra);
    }
    EXPECT_NEAR(sum / n, 10.0, 0.1);
  }
}

TEST(Backoff, ScalesWithNumerology) {
  const TickTiming t = tick_timing({}, {SubcarrierSpacing::k60, SlotSymbols::k7});
  const BackoffPolicy p = backoff_policy(true, DeviceClass::non_urllc, t);
  EXPECT_EQ(p.bi_max, ms_to_ticks(2.5));
}

TEST(PreamblePool, NoReservationUsesAllPreambles) {
  const PreamblePool p = eligible_pool(true, true, 0, 54);
  EXPECT_EQ(p.begin, 0);
  EXPECT_EQ(p.end, 54);
  EXPECT_EQ(eligible_pool(false, false, 3, 54).size(), 54);
}

TEST(PreamblePool, ReservedForPriorityDevices) {
  Enhancements rp;
  rp.rp = true;
  EXPECT_TRUE(is_priority(rp, DeviceClass::urllc, 0));
  EXPECT_FALSE(is_priority(rp, DeviceClass::non_urllc, 3));
  const PreamblePool pool = eligible_pool(is_priority(rp, DeviceClass::urllc, 0), true, 3, 54);
  auto eng = RandomSource(1).stream(Stream::preamble);
  for (int i = 0; i < 1000; ++i) {
    const int p = *select_preamble(pool, eng);
    EXPECT_GE(p, 0);
    EXPECT_LE(p, 2);
  }
  const PreamblePool rest = eligible_pool(false, true, 3, 54);
  EXPECT_EQ(rest.begin, 3);
  EXPECT_EQ(rest.end, 54);
}

TEST(PreamblePool, DrpPromotesPreviouslyFailedDevices) {
  Enhancements drp;
  drp.drp = true;
  EXPECT_TRUE(is_priority(drp, DeviceClass::non_urllc, 1));
  EXPECT_FALSE(is_priority(drp, DeviceClass::non_urllc, 0));
  EXPECT_TRUE(is_priority(drp, DeviceClass::urllc, 0));
  EXPECT_TRUE(eligible_pool(true, true, 4, 54).contains(3));
  EXPECT_FALSE(eligible_pool(true, true, 4, 54).contains(4));
}

TEST(PreamblePool, EmptyPoolDefers) {
  auto eng = RandomSource(1).stream(Stream::preamble);
  EXPECT_FALSE(select_preamble(PreamblePool{3, 3}, eng));
}

TEST(PreamblePool, UniformOverFullSet) {
  auto eng = RandomSource(1).stream(Stream::preamble);
  std::vector<int> hist(54, 0);
  for (int i = 0; i < 54000; ++i) ++hist[static_cast<std::size_t>(*select_preamble(PreamblePool{0, 54}, eng))];
  for (int h : hist) EXPECT_NEAR(h, 1000, 150);
}

TEST(ReservedPool, ConstantLoad) {
  auto s = ReservedPoolState::dynamic(kBase.sib2_period, 54);
  int r = 0;
  for (Tick t = 0; t < 2 * kBase.sib2_period; t += kBase.ra_period) r = update_reserved_pool(s, t, 4, kBase.ra_period);
  EXPECT_EQ(r, 4);
}

TEST(ReservedPool, ZeroLoadEmptiesThePool) {
  auto s = ReservedPoolState::dynamic(kBase.sib2_period, 54);
  int r = -1;
  for (Tick t = 0; t < kBase.sib2_period; t += kBase.ra_period) r = update_reserved_pool(s, t, 0, kBase.ra_period);
  EXPECT_EQ(r, 0);
  EXPECT_EQ(eligible_pool(true, true, r, 54).size(), 54);
}

TEST(ReservedPool, FixedWithoutDrp) {
  auto s = ReservedPoolState::fixed(3, 54);
  for (Tick t = 0; t < kBase.sib2_period; t += kBase.ra_period) EXPECT_EQ(update_reserved_pool(s, t, 40, kBase.ra_period), 3);
}

TEST(ReservedPool, WindowCoversExactlyOneSib2Period) {
  auto s = ReservedPoolState::dynamic(kBase.sib2_period, 54);
  // 16 samples at 5 ms make up the 80 ms window.
  for (int i = 0; i < 16; ++i) s.record(i * kBase.ra_period, 10);
  EXPECT_EQ(s.reserved(16 * kBase.ra_period), 10);
  for (int i = 16; i < 32; ++i) s.record(i * kBase.ra_period, 2);
  EXPECT_EQ(s.reserved(32 * kBase.ra_period), 2);
  // Half-up rounding: {1, 2} averages to 1.5 -> 2.
  auto h = ReservedPoolState::dynamic(kBase.sib2_period, 54);
  h.record(0, 1);
  h.record(kBase.ra_period, 2);
  EXPECT_EQ(h.reserved(2 * kBase.ra_period), 2);
  // Clamped below the preamble count.
  auto c = ReservedPoolState::dynamic(kBase.sib2_period, 54);
  c.record(0, 500);
  EXPECT_EQ(c.reserved(kBase.ra_period), 53);
}
