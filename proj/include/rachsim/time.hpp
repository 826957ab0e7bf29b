#pragma once

#include <cmath>
#include <cstdint>

namespace rachsim {

// Simulator clock. One tick is 1/56 ms so every numerology scale factor
// (15/scs with scs in {15,30,60,120}, sym/7 with sym in {7,4,2}) maps an
// integer-millisecond duration onto an integer number of ticks.
using Tick = std::int64_t;

inline constexpr Tick kTicksPerMs = 56;

inline Tick ms_to_ticks(double ms) {
  return static_cast<Tick>(std::llround(ms * static_cast<double>(kTicksPerMs)));
}

inline Tick ms_to_ticks_floor(double ms) {
  return static_cast<Tick>(std::floor(ms * static_cast<double>(kTicksPerMs)));
}

constexpr double ticks_to_ms(Tick t) {
  return static_cast<double>(t) / static_cast<double>(kTicksPerMs);
}

// Smallest multiple of `period` that is >= t (t >= 0, period > 0).
constexpr Tick ceil_to_period(Tick t, Tick period) {
  return ((t + period - 1) / period) * period;
}

}  // namespace rachsim
