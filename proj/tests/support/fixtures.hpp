#pragma once

#include <vector>

#include "rachsim/engine.hpp"

namespace rachsim::testing {

inline DeviceSpec device_at(DeviceId id, double arrival_ms, Placement placement = {},
                            DeviceClass cls = DeviceClass::urllc) {
  DeviceSpec d;
  d.id = id;
  d.cls = cls;
  d.arrival = ms_to_ticks(arrival_ms);
  d.placement = placement;
  d.draw_key = static_cast<std::uint64_t>(id);
  return d;
}

inline Placement macro_placement(const CellLayout& l, int cell, double dx = 10.0) {
  Placement p;
  p.position = {l.macro[static_cast<std::size_t>(cell)].x + dx, l.macro[static_cast<std::size_t>(cell)].y};
  p.serving_cell = cell;
  return p;
}

inline EngineHooks always_detect() {
  EngineHooks h;
  h.detection_probability = [](int) { return 1.0; };
  return h;
}

inline Scenario clean_scenario() {
  Scenario s;
  s.harq_fail_prob = 0.0;
  return s;
}

}  // namespace rachsim::testing
