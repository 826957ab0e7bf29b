#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "rachsim/numerology.hpp"
#include "rachsim/topology.hpp"
#include "rachsim/traffic.hpp"

namespace rachsim {

struct Enhancements {
  bool edt = false;  // two-step early data transmission
  bool rp = false;   // fixed reserved preambles for uRLLC
  bool drp = false;  // dynamic reserved preambles
  bool ebf = false;  // enhanced back-off
  bool pp = false;   // parallel preambles over a femto overlay

  bool any() const { return edt || rp || drp || ebf || pp; }

  std::string to_string() const {
    std::string out;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!out.empty()) out += ',';
      out += name;
    };
    add(edt, "edt");
    add(rp, "rp");
    add(drp, "drp");
    add(ebf, "ebf");
    add(pp, "pp");
    return out;
  }

  friend bool operator==(const Enhancements&, const Enhancements&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::optional<int> line = std::nullopt)
      : std::runtime_error(line ? "line " + std::to_string(*line) + ": " + what : what), line_(line) {}

  std::optional<int> line() const { return line_; }

 private:
  std::optional<int> line_;
};

/// Full simulation configuration. Defaults reproduce the LTE reference setup.
struct Scenario {
  std::string name = "scenario";
  // Devices per macro cell; the deployment holds n_devices * n_macro_cells.
  std::int64_t n_devices = 5000;
  double urllc_fraction = 1.0;
  int n_preambles = 54;
  int max_preamble_tx = 10;
  // Static reserved-pool size (used with `rp`). With `drp` the pool is dynamic.
  int reserved_r = 3;
  Enhancements enhancements;
  Numerology numerology;
  // Compress the arrival horizons together with the control-plane timing so
  // the offered load per RA opportunity is the same for every numerology.
  bool numerology_scales_traffic = true;
  TimingParams timing;
  TopologyConfig topology;
  TrafficConfig traffic;
  double harq_fail_prob = 0.10;
  int max_harq = 5;
  int rar_grants_per_msg = 3;
  int cce_total = 16;
  int cce_per_pdcch = 4;
  // Optional preamble-detection gate on Msg-1 SINR; off when unset.
  std::optional<double> sinr_gate_db;
  std::uint64_t seed = 1;

  std::int64_t total_devices() const { return n_devices * topology.n_macro_cells; }
  int rar_grants_per_subframe() const { return (cce_total / cce_per_pdcch) * rar_grants_per_msg; }
  bool dynamic_reservation() const { return enhancements.drp; }
};

/// Throws ConfigError naming the first violated constraint.
inline void validate(const Scenario& s) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (s.n_devices < 0) fail("n_devices must be >= 0");
  if (!(s.urllc_fraction >= 0.0 && s.urllc_fraction <= 1.0)) fail("urllc_fraction must lie in [0, 1]");
  if (s.n_preambles < 1) fail("n_preambles must be >= 1");
  if (s.max_preamble_tx < 1) fail("max_preamble_tx must be >= 1");
  if (s.reserved_r < 0 || s.reserved_r >= s.n_preambles)
    fail("reserved_r must satisfy 0 <= reserved_r < n_preambles (" + std::to_string(s.n_preambles) + ")");
  if (s.enhancements.rp && s.enhancements.drp) fail("enhancements rp and drp are mutually exclusive");
  if (!(s.harq_fail_prob >= 0.0 && s.harq_fail_prob <= 1.0)) fail("harq_fail_prob must lie in [0, 1]");
  if (s.max_harq < 1) fail("max_harq must be >= 1");
  if (s.rar_grants_per_msg < 1) fail("rar_grants_per_msg must be >= 1");
  if (s.cce_per_pdcch < 1 || s.cce_total < s.cce_per_pdcch) fail("cce_total must be >= cce_per_pdcch >= 1");

  const TimingParams& t = s.timing;
  for (double d : {t.t_msg1_ms, t.t_msg2_ms, t.t_msg3_ms, t.t_msg4_ms, t.rar_window_ms, t.bi_max_ms,
                   t.contention_resolution_timer_ms}) {
    if (!(d >= 0.0)) fail("durations must be >= 0 ms");
  }
  if (!(t.ra_period_ms > 0.0)) fail("ra_period_ms must be > 0");
  if (!(t.t_msg1_ms > 0.0)) fail("t_msg1_ms must be > 0");
  if (!(t.sib2_period_ms > 0.0)) fail("sib2_period_ms must be > 0");
  const TickTiming ticks = tick_timing(t, s.numerology);
  if (ticks.ra_period <= 0 || ticks.msg1 <= 0 || ticks.subframe <= 0)
    fail("scaled RA period and Msg-1 time must be at least one clock tick");

  const TopologyConfig& g = s.topology;
  if (g.n_macro_cells != 1 && g.n_macro_cells != 3) fail("n_macro_cells must be 1 or 3");
  if (!(g.cell_radius_m > 0.0)) fail("cell_radius_m must be > 0");
  if (!(g.femto_radius_m > 0.0 && g.femto_radius_m < g.cell_radius_m))
    fail("femto_radius_m must satisfy 0 < femto_radius_m < cell_radius_m");
  if (g.n_femto_cells < 0) fail("n_femto_cells must be >= 0");
  if (!(g.pl_exponent > 0.0)) fail("pl_exponent must be > 0");
  if (!(g.pl_ref_dist_m > 0.0)) fail("pl_ref_dist_m must be > 0");
  if (!(g.bw_mhz > 0.0)) fail("bw_mhz must be > 0");

  const TrafficConfig& tr = s.traffic;
  if (!(tr.urllc_horizon_s > 0.0) || !(tr.non_urllc_horizon_s > 0.0)) fail("traffic horizons must be > 0");
  if (!(tr.beta_alpha > 0.0) || !(tr.beta_beta > 0.0)) fail("beta_alpha and beta_beta must be > 0");
}

}  // namespace rachsim
