#pragma once

// Scenario files: flat UTF-8 `key = value` lines, `#` starts a comment.
// Durations are in ms, distances in m, powers in dB/dBm, enhancement flags
// are comma-separated. Every key is optional; missing keys keep the defaults.

#include <charconv>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "rachsim/scenario.hpp"

namespace rachsim {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view v) {
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("expected a number, got '" + std::string(v) + "'");
  return out;
}

template <typename Int>
Int parse_int(std::string_view v) {
  Int out{};
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw ConfigError("expected an integer, got '" + std::string(v) + "'");
  return out;
}

inline bool parse_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("expected a boolean, got '" + std::string(v) + "'");
}

inline Enhancements parse_enhancements(std::string_view v) {
  Enhancements e;
  std::string_view rest = v;
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view tok = trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (tok.empty() || tok == "none") continue;
    if (tok == "edt") e.edt = true;
    else if (tok == "rp") e.rp = true;
    else if (tok == "drp") e.drp = true;
    else if (tok == "ebf") e.ebf = true;
    else if (tok == "pp") e.pp = true;
    else throw ConfigError("unknown enhancement '" + std::string(tok) + "' (expected edt, rp, drp, ebf, pp)");
  }
  return e;
}

}  // namespace detail

struct ScenarioKey {
  std::string name;
  std::string description;
  std::function<void(Scenario&, std::string_view)> set;
  std::function<std::string(const Scenario&)> get;
};

/// The documented key list, in canonical serialization order.
inline const std::vector<ScenarioKey>& scenario_keys() {
  using detail::format_double;
  using detail::parse_double;
  static const std::vector<ScenarioKey> keys = [] {
    std::vector<ScenarioKey> k;
    auto dbl = [&k](std::string name, std::string desc, auto member) {
      k.push_back({std::move(name), std::move(desc),
                   [member](Scenario& s, std::string_view v) { member(s) = parse_double(v); },
                   [member](const Scenario& s) { return format_double(member(s)); }});
    };
    auto integer = [&k](std::string name, std::string desc, auto member) {
      k.push_back({std::move(name), std::move(desc),
                   [member](Scenario& s, std::string_view v) {
                     member(s) = detail::parse_int<std::remove_reference_t<decltype(member(s))>>(v);
                   },
                   [member](const Scenario& s) { return std::to_string(member(s)); }});
    };

    k.push_back({"name", "scenario label carried into reports",
                 [](Scenario& s, std::string_view v) { s.name = std::string(v); },
                 [](const Scenario& s) { return s.name; }});
    integer("n_devices", "devices per macro cell", [](auto& s) -> auto& { return s.n_devices; });
    dbl("urllc_fraction", "share of uRLLC devices in [0,1]", [](auto& s) -> auto& { return s.urllc_fraction; });
    integer("n_preambles", "contention preambles per gNB", [](auto& s) -> auto& { return s.n_preambles; });
    integer("max_preamble_tx", "Msg-1 attempts before a device fails",
            [](auto& s) -> auto& { return s.max_preamble_tx; });
    k.push_back({"reserved_r", "reserved preambles (count, or `dynamic` with drp)",
                 [](Scenario& s, std::string_view v) {
                   if (v == "dynamic") {
                     s.reserved_r = -1;  // resolved in build_scenario
                   } else {
                     s.reserved_r = detail::parse_int<int>(v);
                   }
                 },
                 [](const Scenario& s) { return s.enhancements.drp ? std::string("dynamic") : std::to_string(s.reserved_r); }});
    k.push_back({"enhancements", "comma-separated subset of edt,rp,drp,ebf,pp",
                 [](Scenario& s, std::string_view v) { s.enhancements = detail::parse_enhancements(v); },
                 [](const Scenario& s) { return s.enhancements.any() ? s.enhancements.to_string() : std::string("none"); }});
    k.push_back({"subcarrier_spacing_khz", "15, 30, 60 or 120",
                 [](Scenario& s, std::string_view v) {
                   try {
                     s.numerology.spacing = spacing_from_khz(detail::parse_int<int>(v));
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                   }
                 },
                 [](const Scenario& s) { return std::to_string(s.numerology.spacing_khz()); }});
    k.push_back({"symbols_per_slot", "7, 4 or 2",
                 [](Scenario& s, std::string_view v) {
                   try {
                     s.numerology.symbols = symbols_from_count(detail::parse_int<int>(v));
                   } catch (const std::invalid_argument& e) {
                     throw ConfigError(e.what());
                   }
                 },
                 [](const Scenario& s) { return std::to_string(s.numerology.symbols_per_slot()); }});
    k.push_back({"numerology_scales_traffic", "compress arrival horizons with the numerology (bool)",
                 [](Scenario& s, std::string_view v) { s.numerology_scales_traffic = detail::parse_bool(v); },
                 [](const Scenario& s) { return std::string(s.numerology_scales_traffic ? "true" : "false"); }});
    dbl("t_msg1_ms", "Msg-1 transmission time", [](auto& s) -> auto& { return s.timing.t_msg1_ms; });
    dbl("t_msg2_ms", "Msg-2 processing/transmission time", [](auto& s) -> auto& { return s.timing.t_msg2_ms; });
    dbl("t_msg3_ms", "Msg-3 transmission time", [](auto& s) -> auto& { return s.timing.t_msg3_ms; });
    dbl("t_msg4_ms", "Msg-4 transmission time", [](auto& s) -> auto& { return s.timing.t_msg4_ms; });
    dbl("ra_period_ms", "RA subframe period", [](auto& s) -> auto& { return s.timing.ra_period_ms; });
    dbl("rar_window_ms", "RA response window", [](auto& s) -> auto& { return s.timing.rar_window_ms; });
    dbl("bi_max_ms", "back-off indicator upper bound", [](auto& s) -> auto& { return s.timing.bi_max_ms; });
    dbl("contention_resolution_timer_ms", "mac-ContentionResolutionTimer",
        [](auto& s) -> auto& { return s.timing.contention_resolution_timer_ms; });
    dbl("sib2_period_ms", "SIB2 broadcast period", [](auto& s) -> auto& { return s.timing.sib2_period_ms; });
    integer("n_macro_cells", "1 or 3", [](auto& s) -> auto& { return s.topology.n_macro_cells; });
    dbl("cell_radius_m", "macro cell radius", [](auto& s) -> auto& { return s.topology.cell_radius_m; });
    integer("n_femto_cells", "femto cells overlaid on the macro cluster",
            [](auto& s) -> auto& { return s.topology.n_femto_cells; });
    dbl("femto_radius_m", "femto coverage radius", [](auto& s) -> auto& { return s.topology.femto_radius_m; });
    dbl("pl_ref_db", "path loss at the reference distance", [](auto& s) -> auto& { return s.topology.pl_ref_db; });
    dbl("pl_ref_dist_m", "path-loss reference distance", [](auto& s) -> auto& { return s.topology.pl_ref_dist_m; });
    dbl("pl_exponent", "path-loss exponent", [](auto& s) -> auto& { return s.topology.pl_exponent; });
    dbl("p_max_dbm", "device maximum transmit power", [](auto& s) -> auto& { return s.topology.p_max_dbm; });
    dbl("p_init_target_dbm", "initial received target power",
        [](auto& s) -> auto& { return s.topology.p_init_target_dbm; });
    dbl("ramp_step_db", "power ramping step", [](auto& s) -> auto& { return s.topology.ramp_step_db; });
    k.push_back({"noise_power_dbm", "receiver noise power (default: thermal over bw_mhz)",
                 [](Scenario& s, std::string_view v) {
                   if (v == "thermal") s.topology.noise_power_dbm.reset();
                   else s.topology.noise_power_dbm = parse_double(v);
                 },
                 [](const Scenario& s) {
                   return s.topology.noise_power_dbm ? format_double(*s.topology.noise_power_dbm) : std::string("thermal");
                 }});
    dbl("freq_ghz", "carrier frequency", [](auto& s) -> auto& { return s.topology.freq_ghz; });
    dbl("bw_mhz", "channel bandwidth", [](auto& s) -> auto& { return s.topology.bw_mhz; });
    dbl("urllc_horizon_s", "uRLLC Beta arrival horizon", [](auto& s) -> auto& { return s.traffic.urllc_horizon_s; });
    dbl("non_urllc_horizon_s", "non-uRLLC uniform arrival horizon",
        [](auto& s) -> auto& { return s.traffic.non_urllc_horizon_s; });
    dbl("beta_alpha", "uRLLC Beta shape alpha", [](auto& s) -> auto& { return s.traffic.beta_alpha; });
    dbl("beta_beta", "uRLLC Beta shape beta", [](auto& s) -> auto& { return s.traffic.beta_beta; });
    dbl("harq_fail_prob", "per-transmission Msg-3/Msg-4 loss probability",
        [](auto& s) -> auto& { return s.harq_fail_prob; });
    integer("max_harq", "Msg-3/Msg-4 transmissions per message", [](auto& s) -> auto& { return s.max_harq; });
    integer("rar_grants_per_msg", "UL grants per RAR", [](auto& s) -> auto& { return s.rar_grants_per_msg; });
    integer("cce_total", "CCEs available for RAR per subframe", [](auto& s) -> auto& { return s.cce_total; });
    integer("cce_per_pdcch", "CCEs per RAR PDCCH", [](auto& s) -> auto& { return s.cce_per_pdcch; });
    k.push_back({"sinr_gate_db", "optional Msg-1 SINR detection threshold (`off` to disable)",
                 [](Scenario& s, std::string_view v) {
                   if (v == "off") s.sinr_gate_db.reset();
                   else s.sinr_gate_db = parse_double(v);
                 },
                 [](const Scenario& s) { return s.sinr_gate_db ? format_double(*s.sinr_gate_db) : std::string("off"); }});
    k.push_back({"seed", "64-bit root seed",
                 [](Scenario& s, std::string_view v) { s.seed = detail::parse_int<std::uint64_t>(v); },
                 [](const Scenario& s) { return std::to_string(s.seed); }});
    return k;
  }();
  return keys;
}

inline const ScenarioKey* find_key(std::string_view name) {
  if (name == "n_femto") name = "n_femto_cells";
  for (const auto& k : scenario_keys())
    if (k.name == name) return &k;
  return nullptr;
}

/// Applies one `key=value` assignment. Does not validate the whole scenario.
inline void apply_setting(Scenario& s, std::string_view key, std::string_view value) {
  const ScenarioKey* k = find_key(key);
  if (k == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'");
  k->set(s, value);
}

namespace detail {

// reserved_r = -1 marks an explicit `dynamic`; resolve it against the flags.
inline void resolve_reservation(Scenario& s, bool reserved_given) {
  if (s.reserved_r == -1) {
    if (!s.enhancements.drp) throw ConfigError("reserved_r=dynamic requires the drp enhancement");
    s.reserved_r = 0;
  } else if (reserved_given && s.enhancements.drp) {
    throw ConfigError("drp makes the reserved pool dynamic; reserved_r must be `dynamic` or omitted");
  }
}

}  // namespace detail

/// Parses a scenario document. Unknown keys, duplicates and malformed values
/// are reported with their line number; constraint violations name the rule.
inline Scenario build_scenario(std::string_view text) {
  Scenario s;
  std::set<std::string> seen;
  int line_no = 0;
  std::string_view rest = text;
  while (!rest.empty() || line_no == 0) {
    ++line_no;
    const auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) {
      if (rest.empty()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected `key = value`", line_no);
    const std::string_view key = detail::trim(line.substr(0, eq));
    const std::string_view value = detail::trim(line.substr(eq + 1));
    const ScenarioKey* k = find_key(key);
    if (k == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'", line_no);
    if (!seen.insert(k->name).second) throw ConfigError("duplicate key '" + k->name + "'", line_no);
    try {
      k->set(s, value);
    } catch (const ConfigError& e) {
      throw ConfigError(k->name + ": " + e.what(), line_no);
    }
  }
  detail::resolve_reservation(s, seen.count("reserved_r") > 0);
  validate(s);
  return s;
}

/// Applies `key=value` overrides to an already valid scenario and validates
/// the result.
inline Scenario with_settings(Scenario s, const std::vector<std::pair<std::string, std::string>>& settings) {
  bool reserved_given = false;
  for (const auto& [k, v] : settings) {
    apply_setting(s, k, v);
    if (find_key(k)->name == "reserved_r") reserved_given = true;
  }
  detail::resolve_reservation(s, reserved_given);
  validate(s);
  return s;
}

inline Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read scenario file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return build_scenario(ss.str());
}

/// Canonical document: every key in registry order.
inline std::string serialize_scenario(const Scenario& s, bool include_seed = true) {
  std::string out;
  for (const auto& k : scenario_keys()) {
    if (!include_seed && k.name == "seed") continue;
    out += k.name + " = " + k.get(s) + "\n";
  }
  return out;
}

}  // namespace rachsim
