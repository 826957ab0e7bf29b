#pragma once

#include <stdexcept>
#include <string>

#include "rachsim/time.hpp"

namespace rachsim {

enum class SubcarrierSpacing : int { k15 = 15, k30 = 30, k60 = 60, k120 = 120 };
enum class SlotSymbols : int { k7 = 7, k4 = 4, k2 = 2 };

struct Numerology {
  SubcarrierSpacing spacing = SubcarrierSpacing::k15;
  SlotSymbols symbols = SlotSymbols::k7;

  int spacing_khz() const { return static_cast<int>(spacing); }
  int symbols_per_slot() const { return static_cast<int>(symbols); }

  friend bool operator==(const Numerology&, const Numerology&) = default;
};

inline SubcarrierSpacing spacing_from_khz(int khz) {
  switch (khz) {
    case 15: return SubcarrierSpacing::k15;
    case 30: return SubcarrierSpacing::k30;
    case 60: return SubcarrierSpacing::k60;
    case 120: return SubcarrierSpacing::k120;
  }
  throw std::invalid_argument("subcarrier spacing must be one of 15, 30, 60, 120 kHz, got " +
                              std::to_string(khz));
}

inline SlotSymbols symbols_from_count(int n) {
  switch (n) {
    case 7: return SlotSymbols::k7;
    case 4: return SlotSymbols::k4;
    case 2: return SlotSymbols::k2;
  }
  throw std::invalid_argument("symbols per slot must be one of 7, 4, 2, got " + std::to_string(n));
}

/// Exact time compression of a numerology relative to LTE (15 kHz, 7 symbols),
/// kept as the rational num/den.
struct TimeScale {
  int num = 1;
  int den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // Scaled tick count of a baseline duration. Exact for integer-ms inputs.
  Tick scale_ms(double base_ms) const {
    return ms_to_ticks(base_ms * static_cast<double>(num) / static_cast<double>(den));
  }
};

inline TimeScale time_scale_ratio(const Numerology& n) {
  // (15 / scs) * (sym / 7)
  int num = 15 * n.symbols_per_slot();
  int den = 7 * n.spacing_khz();
  int a = num, b = den;
  while (b != 0) {
    int r = a % b;
    a = b;
    b = r;
  }
  return {num / a, den / a};
}

inline double time_scale(const Numerology& n) { return time_scale_ratio(n).value(); }

/// Control-plane durations in milliseconds. Defaults are the LTE baseline.
struct TimingParams {
  double t_msg1_ms = 1.0;
  double t_msg2_ms = 3.0;
  double t_msg3_ms = 5.0;
  double t_msg4_ms = 5.0;
  double ra_period_ms = 5.0;
  double rar_window_ms = 5.0;
  double bi_max_ms = 20.0;
  double contention_resolution_timer_ms = 48.0;
  double sib2_period_ms = 80.0;

  friend bool operator==(const TimingParams&, const TimingParams&) = default;
};

/// Multiplies every duration by the numerology's time scale and quantizes
/// the result to whole clock ticks.
inline TimingParams scale_timing(const TimingParams& base, const Numerology& numerology) {
  const TimeScale s = time_scale_ratio(numerology);
  auto scaled = [&](double ms) { return ticks_to_ms(s.scale_ms(ms)); };
  TimingParams out;
  out.t_msg1_ms = scaled(base.t_msg1_ms);
  out.t_msg2_ms = scaled(base.t_msg2_ms);
  out.t_msg3_ms = scaled(base.t_msg3_ms);
  out.t_msg4_ms = scaled(base.t_msg4_ms);
  out.ra_period_ms = scaled(base.ra_period_ms);
  out.rar_window_ms = scaled(base.rar_window_ms);
  out.bi_max_ms = scaled(base.bi_max_ms);
  out.contention_resolution_timer_ms = scaled(base.contention_resolution_timer_ms);
  out.sib2_period_ms = scaled(base.sib2_period_ms);
  return out;
}

/// Scaled durations in clock ticks, as consumed by the engine.
struct TickTiming {
  Tick subframe = 0;  // one baseline millisecond, scaled
  Tick msg1 = 0;
  Tick msg2 = 0;
  Tick msg3 = 0;
  Tick msg4 = 0;
  Tick ra_period = 0;
  Tick rar_window = 0;
  Tick bi_max = 0;
  Tick contention_resolution = 0;
  Tick sib2_period = 0;
  TimeScale scale;
};

inline TickTiming tick_timing(const TimingParams& base, const Numerology& numerology) {
  const TimeScale s = time_scale_ratio(numerology);
  TickTiming t;
  t.scale = s;
  t.subframe = s.scale_ms(1.0);
  t.msg1 = s.scale_ms(base.t_msg1_ms);
  t.msg2 = s.scale_ms(base.t_msg2_ms);
  t.msg3 = s.scale_ms(base.t_msg3_ms);
  t.msg4 = s.scale_ms(base.t_msg4_ms);
  t.ra_period = s.scale_ms(base.ra_period_ms);
  t.rar_window = s.scale_ms(base.rar_window_ms);
  t.bi_max = s.scale_ms(base.bi_max_ms);
  t.contention_resolution = s.scale_ms(base.contention_resolution_timer_ms);
  t.sib2_period = s.scale_ms(base.sib2_period_ms);
  return t;
}

}  // namespace rachsim
