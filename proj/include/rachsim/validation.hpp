#pragma once

// Built-in reference scenarios and expected KPI values, grouped by reference
// table id (II..VII for tables, F6..F9 for the delay-CDF figures).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "rachsim/config.hpp"
#include "rachsim/kpi.hpp"
#include "rachsim/sweep.hpp"

namespace rachsim {

struct ReferenceScenario {
  std::string id;
  std::string description;
  std::vector<std::pair<std::string, std::string>> settings;  // over the defaults
  // Deep-percentile checks need this many pooled samples; the scenario is
  // replicated until the class it is judged on has collected them.
  std::optional<DeviceClass> deep_class;

  Scenario scenario() const {
    Scenario s = with_settings(Scenario{}, settings);
    s.name = id;
    return s;
  }
};

/// Femto overlay used wherever parallel preambles run without a sweep.
inline constexpr int kReferenceFemtoCells = 10;

inline const std::vector<ReferenceScenario>& reference_scenarios() {
  static const std::vector<ReferenceScenario> all = [] {
    std::vector<ReferenceScenario> v;
    const std::string femto = std::to_string(kReferenceFemtoCells);
    v.push_back({"lte_5k", "baseline, 5K devices per cell", {}, DeviceClass::urllc});
    v.push_back({"lte_10k", "baseline, 10K devices per cell", {{"n_devices", "10000"}}, {}});
    v.push_back({"edt_5k", "EDT", {{"enhancements", "edt"}}, {}});
    for (int f : {5, 8, 10, 12})
      v.push_back({"pp_femto_" + std::to_string(f), "parallel preambles, " + std::to_string(f) + " femto cells",
                   {{"enhancements", "pp"}, {"n_femto_cells", std::to_string(f)}}, {}});
    v.push_back({"urllc_edt_pp", "uRLLC only, EDT + PP", {{"enhancements", "edt,pp"}, {"n_femto_cells", femto}},
                 DeviceClass::urllc});
    v.push_back({"urllc_edt_pp_ebf", "uRLLC only, EDT + PP + EBF",
                 {{"enhancements", "edt,pp,ebf"}, {"n_femto_cells", femto}}, DeviceClass::urllc});
    for (int scs : {15, 30, 60, 120}) {
      for (int sym : {7, 4, 2}) {
        if (scs == 15 && sym == 7) continue;  // lte_5k
        v.push_back({"num_" + std::to_string(scs) + "k_" + std::to_string(sym) + "sym",
                     "numerology " + std::to_string(scs) + " kHz, " + std::to_string(sym) + " symbols",
                     {{"subcarrier_spacing_khz", std::to_string(scs)}, {"symbols_per_slot", std::to_string(sym)}},
                     {}});
      }
    }
    v.push_back({"mixed_lte", "mixed traffic, baseline", {{"urllc_fraction", "0.05"}}, {}});
    for (int r = 1; r <= 4; ++r)
      v.push_back({"mixed_rp_r" + std::to_string(r), "mixed traffic, r = " + std::to_string(r) + " reserved",
                   {{"urllc_fraction", "0.05"}, {"enhancements", "rp"}, {"reserved_r", std::to_string(r)}}, {}});
    v.push_back({"mixed_edt_drp_ebf", "mixed traffic, EDT + DRP + EBF",
                 {{"urllc_fraction", "0.05"}, {"enhancements", "edt,drp,ebf"}}, DeviceClass::urllc});
    return v;
  }();
  return all;
}

inline const ReferenceScenario* find_reference_scenario(const std::string& id) {
  for (const auto& s : reference_scenarios())
    if (s.id == id) return &s;
  return nullptr;
}

inline std::string numerology_scenario_id(int scs, int sym) {
  if (scs == 15 && sym == 7) return "lte_5k";
  return "num_" + std::to_string(scs) + "k_" + std::to_string(sym) + "sym";
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class Metric {
  collision_pct,             // all cells
  reserved_collision_pct,    // reserved-pool cells
  contention_collision_pct,  // contention-pool cells
  urllc_collision_pct,       // cells with a uRLLC collision / all cells
  non_urllc_collision_pct,
  reserved_util_pct,
  contention_util_pct,
  non_urllc_util_pct,        // cells used by non-uRLLC / all cells
  mean_msg1,
  mean_delay_ms,
  median_delay_ms,
  p9999_delay_ms,
  urllc_p9999_delay_ms,
};

inline const char* to_string(Metric m) {
  switch (m) {
    case Metric::collision_pct: return "collision %";
    case Metric::reserved_collision_pct: return "reserved-pool collision %";
    case Metric::contention_collision_pct: return "contention-pool collision %";
    case Metric::urllc_collision_pct: return "uRLLC collision %";
    case Metric::non_urllc_collision_pct: return "non-uRLLC collision %";
    case Metric::reserved_util_pct: return "reserved-pool utilization %";
    case Metric::contention_util_pct: return "contention-pool utilization %";
    case Metric::non_urllc_util_pct: return "non-uRLLC utilization %";
    case Metric::mean_msg1: return "mean Msg-1 transmissions";
    case Metric::mean_delay_ms: return "mean delay ms";
    case Metric::median_delay_ms: return "median delay ms";
    case Metric::p9999_delay_ms: return "p99.99 delay ms";
    case Metric::urllc_p9999_delay_ms: return "uRLLC p99.99 delay ms";
  }
  return "?";
}

inline std::optional<double> metric_value(const KpiReport& r, Metric m) {
  auto pct = [](std::optional<double> v) { return v ? std::optional<double>(*v * 100.0) : std::nullopt; };
  switch (m) {
    case Metric::collision_pct: return pct(r.collision_probability);
    case Metric::reserved_collision_pct: return pct(r.collision_reserved);
    case Metric::contention_collision_pct: return pct(r.collision_contention);
    case Metric::urllc_collision_pct: return pct(r.urllc.collision_probability);
    case Metric::non_urllc_collision_pct: return pct(r.non_urllc.collision_probability);
    case Metric::reserved_util_pct: return pct(r.utilization.reserved);
    case Metric::contention_util_pct: return pct(r.utilization.contention);
    case Metric::non_urllc_util_pct: return pct(r.non_urllc.utilization);
    case Metric::mean_msg1: return r.mean_msg1_count;
    case Metric::mean_delay_ms: return r.mean_delay_ms;
    case Metric::median_delay_ms: return r.delay.p50;
    case Metric::p9999_delay_ms: return r.delay.p9999;
    case Metric::urllc_p9999_delay_ms: return r.urllc.delay.p9999;
  }
  return std::nullopt;
}

struct Tolerance {
  enum class Kind { absolute, relative, at_most, at_least };
  Kind kind = Kind::absolute;
  double value = 0.0;

  static Tolerance abs(double v) { return {Kind::absolute, v}; }
  static Tolerance rel(double v) { return {Kind::relative, v}; }
  static Tolerance at_most() { return {Kind::at_most, 0.0}; }
  static Tolerance at_least() { return {Kind::at_least, 0.0}; }

  bool accepts(double expected, double actual) const {
    switch (kind) {
      case Kind::absolute: return std::abs(actual - expected) <= value + 1e-12;
      case Kind::relative: return std::abs(actual - expected) <= value * std::abs(expected) + 1e-12;
      case Kind::at_most: return actual <= expected;
      case Kind::at_least: return actual >= expected;
    }
    return false;
  }

  std::string describe(double expected) const {
    switch (kind) {
      case Kind::absolute: return detail::format_double(expected) + " +/- " + detail::format_double(value);
      case Kind::relative:
        return detail::format_double(expected) + " +/- " + detail::format_double(value * 100.0) + "%";
      case Kind::at_most: return "<= " + detail::format_double(expected);
      case Kind::at_least: return ">= " + detail::format_double(expected);
    }
    return {};
  }
};

struct ReferenceEntry {
  std::string table;     // II..VII, F6..F9
  std::string scenario;  // ReferenceScenario id
  Metric metric;
  double expected;
  Tolerance tolerance;
};

inline const std::vector<ReferenceEntry>& reference_table() {
  static const std::vector<ReferenceEntry> all = [] {
    using M = Metric;
    using T = Tolerance;
    // Collision probabilities below 1 % carry +/- 0.15 pp, delays and
    // utilizations +/- 15 % unless a tighter band is part of the target.
    const T coll = T::abs(0.15);
    const T rel = T::rel(0.15);
    std::vector<ReferenceEntry> v = {
        {"II", "lte_5k", M::collision_pct, 0.48, coll},
        {"II", "lte_5k", M::mean_msg1, 1.4, T::abs(0.15)},
        {"II", "lte_5k", M::mean_delay_ms, 28.98, rel},
        {"II", "lte_10k", M::collision_pct, 1.95, T::abs(0.3)},
        {"II", "lte_10k", M::mean_msg1, 1.42, T::abs(0.15)},
        {"II", "lte_10k", M::mean_delay_ms, 33.62, rel},

        {"III", "lte_5k", M::collision_pct, 0.48, coll},
        {"III", "pp_femto_5", M::collision_pct, 0.42, coll},
        {"III", "pp_femto_8", M::collision_pct, 0.34, coll},
        {"III", "pp_femto_10", M::collision_pct, 0.26, coll},
        {"III", "pp_femto_12", M::collision_pct, 0.22, coll},

        {"IV", "lte_5k", M::collision_pct, 0.48, coll},
        {"IV", "lte_5k", M::mean_msg1, 1.43, T::abs(0.15)},
        {"IV", "lte_5k", M::mean_delay_ms, 29.06, rel},
        {"IV", "urllc_edt_pp", M::collision_pct, 0.04, T::abs(0.05)},
        {"IV", "urllc_edt_pp", M::mean_msg1, 1.2, T::abs(0.15)},
        {"IV", "urllc_edt_pp", M::mean_delay_ms, 5.8, T::rel(0.2)},
        {"IV", "urllc_edt_pp_ebf", M::collision_pct, 0.01, T::abs(0.05)},
        {"IV", "urllc_edt_pp_ebf", M::mean_msg1, 1.09, T::abs(0.15)},
        {"IV", "urllc_edt_pp_ebf", M::mean_delay_ms, 4.47, T::rel(0.2)},

        {"VI", "mixed_rp_r1", M::reserved_collision_pct, 33, T::abs(5)},
        {"VI", "mixed_rp_r2", M::reserved_collision_pct, 0.97, coll},
        {"VI", "mixed_rp_r3", M::reserved_collision_pct, 0, coll},
        {"VI", "mixed_rp_r4", M::reserved_collision_pct, 0, coll},
        {"VI", "mixed_rp_r1", M::reserved_util_pct, 83, T::abs(5)},
        {"VI", "mixed_rp_r2", M::reserved_util_pct, 57, T::abs(5)},
        {"VI", "mixed_rp_r3", M::reserved_util_pct, 38, T::abs(5)},
        {"VI", "mixed_rp_r4", M::reserved_util_pct, 29, T::abs(5)},
        {"VI", "mixed_rp_r1", M::contention_collision_pct, 0.1, coll},
        {"VI", "mixed_rp_r2", M::contention_collision_pct, 0.07, coll},
        {"VI", "mixed_rp_r3", M::contention_collision_pct, 0.03, coll},
        {"VI", "mixed_rp_r4", M::contention_collision_pct, 0.06, coll},
        {"VI", "mixed_rp_r1", M::contention_util_pct, 3.4, rel},
        {"VI", "mixed_rp_r2", M::contention_util_pct, 3.1, rel},
        {"VI", "mixed_rp_r3", M::contention_util_pct, 3.1, rel},
        {"VI", "mixed_rp_r4", M::contention_util_pct, 3.1, rel},

        {"VII", "mixed_lte", M::mean_delay_ms, 26.07, T::rel(0.2)},
        {"VII", "mixed_rp_r3", M::mean_delay_ms, 25, T::rel(0.2)},
        {"VII", "mixed_edt_drp_ebf", M::mean_delay_ms, 4.5, T::rel(0.2)},
        {"VII", "mixed_lte", M::urllc_collision_pct, 0.05, coll},
        {"VII", "mixed_rp_r3", M::reserved_collision_pct, 0, coll},
        {"VII", "mixed_edt_drp_ebf", M::reserved_collision_pct, 0, T::abs(0.02)},
        {"VII", "mixed_lte", M::non_urllc_collision_pct, 0.11, coll},
        {"VII", "mixed_rp_r3", M::contention_collision_pct, 1.06, rel},
        {"VII", "mixed_edt_drp_ebf", M::contention_collision_pct, 0, T::abs(0.02)},
        {"VII", "mixed_rp_r3", M::reserved_util_pct, 23, T::abs(8)},
        {"VII", "mixed_edt_drp_ebf", M::reserved_util_pct, 57, T::abs(8)},
        {"VII", "mixed_lte", M::non_urllc_util_pct, 2.10, rel},
        {"VII", "mixed_rp_r3", M::contention_util_pct, 3, rel},
        {"VII", "mixed_edt_drp_ebf", M::contention_util_pct, 7.6, rel},

        {"F6", "lte_5k", M::median_delay_ms, 29, T::abs(1.5)},
        {"F6", "edt_5k", M::median_delay_ms, 6, T::abs(1.5)},
        {"F7", "urllc_edt_pp", M::p9999_delay_ms, 25, T::at_least()},
        {"F7", "urllc_edt_pp_ebf", M::p9999_delay_ms, 10, T::at_most()},
        {"F8", "mixed_edt_drp_ebf", M::urllc_p9999_delay_ms, 10, T::at_most()},
        {"F9", "mixed_edt_drp_ebf", M::p9999_delay_ms, 16, T::at_most()},
    };
    // Numerology grid: mean delay and collision per cell.
    const std::map<std::pair<int, int>, std::pair<double, double>> grid = {
        {{15, 7}, {29, 0.48}},  {{15, 4}, {14.7, 0.45}}, {{15, 2}, {6.9, 0.45}},
        {{30, 7}, {12.5, 0.46}}, {{30, 4}, {6.8, 0.5}},  {{30, 2}, {3.3, 0.44}},
        {{60, 7}, {6, 0.47}},   {{60, 4}, {3.14, 0.43}}, {{60, 2}, {1.68, 0.46}},
        {{120, 7}, {2.9, 0.43}}, {{120, 4}, {1.66, 0.49}}, {{120, 2}, {0.83, 0.5}},
    };
    for (const auto& [key, val] : grid) {
      const std::string id = numerology_scenario_id(key.first, key.second);
      v.push_back({"V", id, M::mean_delay_ms, val.first, T::rel(0.2)});
      v.push_back({"V", id, M::collision_pct, val.second, coll});
    }
    return v;
  }();
  return all;
}

inline std::vector<std::string> reference_table_ids() {
  return {"II", "III", "IV", "V", "VI", "VII", "F6", "F7", "F8", "F9"};
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

inline constexpr std::uint64_t kDeepSamples = kDeepPercentileMinSamples;

/// Seeds needed so that `cls` collects enough successes for the deep
/// percentile, assuming (near) full success.
inline std::uint64_t seeds_for_deep_percentile(const Scenario& sc, std::optional<DeviceClass> cls,
                                               std::uint64_t min_samples = kDeepSamples) {
  const double total = static_cast<double>(sc.total_devices());
  double per_seed = total;
  if (cls == DeviceClass::urllc) per_seed = std::round(sc.urllc_fraction * total);
  if (cls == DeviceClass::non_urllc) per_seed = total - std::round(sc.urllc_fraction * total);
  if (per_seed <= 0) return 1;
  // 2 % headroom for failed devices.
  return static_cast<std::uint64_t>(std::ceil(static_cast<double>(min_samples) * 1.02 / per_seed));
}

/// Pools seeds from `first` until `cls` (all devices when unset) has at least
/// `min_successes` successes. Starts from the full-success estimate and
/// extends by the observed success rate, so the result is still a plain
/// contiguous seed range.
inline KpiPool run_pooled_until(const Scenario& sc, std::optional<DeviceClass> cls, std::uint64_t first,
                                std::uint64_t min_seeds, std::uint64_t min_successes, unsigned threads) {
  auto successes = [&](const KpiPool& p) {
    if (cls) return p.classes[class_index(*cls)].successes;
    return p.classes[0].successes + p.classes[1].successes;
  };
  std::uint64_t n = std::max(min_seeds, seeds_for_deep_percentile(sc, cls, min_successes));
  KpiPool pool = run_pooled(sc, first, first + n - 1, threads);
  while (successes(pool) < min_successes) {
    const double per_seed = static_cast<double>(successes(pool)) / static_cast<double>(n);
    if (per_seed <= 0.0) return pool;  // nothing ever succeeds; report as is
    const auto want = static_cast<std::uint64_t>(std::ceil(static_cast<double>(min_successes) * 1.01 / per_seed));
    const std::uint64_t extra = std::max<std::uint64_t>(want > n ? want - n : 1, 1);
    pool = merge(pool, run_pooled(sc, first + n, first + n + extra - 1, threads));
    n += extra;
  }
  return pool;
}

struct EntryResult {
  ReferenceEntry entry;
  std::optional<double> actual;
  bool pass = false;
};

struct ValidationOptions {
  std::uint64_t seed_first = 1;
  std::uint64_t n_seeds = 10;
  unsigned threads = 1;
  std::optional<std::string> table;  // all tables when unset
};

/// Runs every scenario the selected entries need, pooling seeds, and judges
/// each entry. Scenarios feeding deep-percentile entries get extra seeds.
inline std::vector<EntryResult> run_validation(const ValidationOptions& opt,
                                               std::map<std::string, KpiReport>* reports_out = nullptr) {
  std::vector<ReferenceEntry> entries;
  for (const auto& e : reference_table())
    if (!opt.table || e.table == *opt.table) entries.push_back(e);

  std::map<std::string, KpiReport> reports;
  for (const auto& e : entries) {
    if (reports.count(e.scenario)) continue;
    const ReferenceScenario* rs = find_reference_scenario(e.scenario);
    if (rs == nullptr) throw std::logic_error("reference entry names unknown scenario " + e.scenario);
    const Scenario sc = rs->scenario();
    bool deep = false;
    for (const auto& x : entries)
      if (x.scenario == e.scenario &&
          (x.metric == Metric::p9999_delay_ms || x.metric == Metric::urllc_p9999_delay_ms))
        deep = true;
    const KpiPool pool =
        deep ? run_pooled_until(sc, rs->deep_class, opt.seed_first, opt.n_seeds, kDeepSamples, opt.threads)
             : run_pooled(sc, opt.seed_first, opt.seed_first + opt.n_seeds - 1, opt.threads);
    reports.emplace(e.scenario, make_report(pool, "pooled"));
  }

  std::vector<EntryResult> out;
  for (const auto& e : entries) {
    EntryResult r{e, metric_value(reports.at(e.scenario), e.metric), false};
    r.pass = r.actual && e.tolerance.accepts(e.expected, *r.actual);
    out.push_back(r);
  }
  if (reports_out) *reports_out = std::move(reports);
  return out;
}

inline void print_validation(std::ostream& os, const std::vector<EntryResult>& results) {
  for (const auto& r : results) {
    os << (r.pass ? "PASS  " : "FAIL  ") << std::left << std::setw(4) << r.entry.table << ' ' << std::setw(18)
       << r.entry.scenario << ' ' << std::setw(30) << to_string(r.entry.metric) << " expected "
       << r.entry.tolerance.describe(r.entry.expected) << ", got "
       << (r.actual ? detail::format_double(std::round(*r.actual * 1e4) / 1e4) : std::string("n/a")) << '\n';
  }
}

}  // namespace rachsim
