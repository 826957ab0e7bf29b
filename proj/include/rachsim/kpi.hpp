#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rachsim/config.hpp"
#include "rachsim/engine.hpp"

namespace rachsim {

class KpiError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Opportunity-cell counts. A cell is one (RA subframe, gNB, preamble).
struct CellTally {
  std::uint64_t cells = 0;
  std::uint64_t used = 0;      // >= 1 transmitter
  std::uint64_t collided = 0;  // >= 2 transmitters

  CellTally& operator+=(const CellTally& o) {
    cells += o.cells;
    used += o.used;
    collided += o.collided;
    return *this;
  }
  friend bool operator==(const CellTally&, const CellTally&) = default;
};

inline std::size_t class_index(DeviceClass c) { return static_cast<std::size_t>(c); }

/// All cell counts derivable from an opportunity log.
struct OpportunityTally {
  CellTally overall;
  CellTally reserved;
  CellTally contention;
  // Cells holding at least one transmitter of the class / a collision involving it.
  std::array<std::uint64_t, 2> used_by_class{};
  std::array<std::uint64_t, 2> collided_with_class{};
  std::uint64_t n_opportunities = 0;  // (subframe, gNB) entries

  OpportunityTally& operator+=(const OpportunityTally& o) {
    overall += o.overall;
    reserved += o.reserved;
    contention += o.contention;
    for (std::size_t c = 0; c < 2; ++c) {
      used_by_class[c] += o.used_by_class[c];
      collided_with_class[c] += o.collided_with_class[c];
    }
    n_opportunities += o.n_opportunities;
    return *this;
  }
  friend bool operator==(const OpportunityTally&, const OpportunityTally&) = default;
};

inline OpportunityTally tally_opportunities(std::span<const RaOpportunity> log) {
  OpportunityTally t;
  std::vector<std::array<int, 2>> per(64);
  for (const RaOpportunity& o : log) {
    ++t.n_opportunities;
    per.assign(static_cast<std::size_t>(o.n_preambles), {0, 0});
    for (const Transmission& x : o.tx) ++per[static_cast<std::size_t>(x.preamble)][class_index(x.cls)];
    const int r = std::clamp(o.reserved, 0, o.n_preambles);
    t.overall.cells += static_cast<std::uint64_t>(o.n_preambles);
    t.reserved.cells += static_cast<std::uint64_t>(r);
    t.contention.cells += static_cast<std::uint64_t>(o.n_preambles - r);
    for (int p = 0; p < o.n_preambles; ++p) {
      const auto& c = per[static_cast<std::size_t>(p)];
      const int n = c[0] + c[1];
      if (n == 0) continue;
      CellTally& pool = p < r ? t.reserved : t.contention;
      ++t.overall.used;
      ++pool.used;
      if (n > 1) {
        ++t.overall.collided;
        ++pool.collided;
      }
      for (std::size_t k = 0; k < 2; ++k) {
        if (c[k] == 0) continue;
        ++t.used_by_class[k];
        if (n > 1) ++t.collided_with_class[k];
      }
    }
  }
  return t;
}

inline std::optional<double> ratio(std::uint64_t num, std::uint64_t den) {
  if (den == 0) return std::nullopt;
  return static_cast<double>(num) / static_cast<double>(den);
}

/// Collided cells over all cells of the observation period.
inline double collision_probability(std::span<const RaOpportunity> log) {
  const OpportunityTally t = tally_opportunities(log);
  if (t.overall.cells == 0) throw KpiError("collision probability is undefined over an empty period");
  return static_cast<double>(t.overall.collided) / static_cast<double>(t.overall.cells);
}

struct Utilization {
  std::optional<double> overall;
  std::optional<double> reserved;    // absent when no reserved cells existed
  std::optional<double> contention;  // absent when the contention pool was empty
  std::optional<double> urllc;
  std::optional<double> non_urllc;
};

inline Utilization utilization_from(const OpportunityTally& t) {
  return {ratio(t.overall.used, t.overall.cells), ratio(t.reserved.used, t.reserved.cells),
          ratio(t.contention.used, t.contention.cells),
          ratio(t.used_by_class[class_index(DeviceClass::urllc)], t.overall.cells),
          ratio(t.used_by_class[class_index(DeviceClass::non_urllc)], t.overall.cells)};
}

inline Utilization preamble_utilization(std::span<const RaOpportunity> log) {
  return utilization_from(tally_opportunities(log));
}

// ---------------------------------------------------------------------------
// Delay distribution
// ---------------------------------------------------------------------------

inline constexpr std::size_t kDeepPercentileMinSamples = 100000;

/// Percentile ranks in basis points (50% = 5000).
inline constexpr std::array<int, 4> kPercentileBp{5000, 9500, 9900, 9999};

/// Smallest sample d with empirical CDF(d) >= bp / 10000. `sorted` ascending.
inline Tick percentile(std::span<const Tick> sorted, int bp) {
  if (sorted.empty()) throw KpiError("percentile of an empty sample");
  const auto n = static_cast<std::uint64_t>(sorted.size());
  std::uint64_t rank = (static_cast<std::uint64_t>(bp) * n + 9999) / 10000;
  rank = std::max<std::uint64_t>(rank, 1);
  return sorted[static_cast<std::size_t>(rank - 1)];
}

struct Percentiles {
  std::optional<double> p50, p95, p99, p9999;  // ms

  std::optional<double> at(int bp) const {
    switch (bp) {
      case 5000: return p50;
      case 9500: return p95;
      case 9900: return p99;
      case 9999: return p9999;
    }
    return std::nullopt;
  }
};

/// Percentiles of an ascending sample; the 99.99th only with >= 1e5 samples.
inline Percentiles percentiles_of(std::span<const Tick> sorted) {
  Percentiles p;
  if (sorted.empty()) return p;
  p.p50 = ticks_to_ms(percentile(sorted, 5000));
  p.p95 = ticks_to_ms(percentile(sorted, 9500));
  p.p99 = ticks_to_ms(percentile(sorted, 9900));
  if (sorted.size() >= kDeepPercentileMinSamples) p.p9999 = ticks_to_ms(percentile(sorted, 9999));
  return p;
}

struct CdfPoint {
  double delay_ms = 0.0;
  double cum_prob = 0.0;
};

struct DelayCdf {
  std::vector<CdfPoint> points;  // one per distinct delay
  Percentiles percentiles;
  std::size_t n_samples = 0;
};

inline DelayCdf cdf_of_sorted(std::span<const Tick> sorted) {
  if (sorted.empty()) throw KpiError("delay CDF needs at least one successful record");
  DelayCdf out;
  out.n_samples = sorted.size();
  const auto n = static_cast<double>(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i + 1 < sorted.size() && sorted[i + 1] == sorted[i]) continue;
    out.points.push_back({ticks_to_ms(sorted[i]), static_cast<double>(i + 1) / n});
  }
  out.percentiles = percentiles_of(sorted);
  return out;
}

/// Empirical CDF of access delay over the successful records.
inline DelayCdf delay_cdf(std::span<const AccessRecord> records) {
  std::vector<Tick> d;
  for (const AccessRecord& r : records)
    if (r.success) d.push_back(r.t_total());
  std::sort(d.begin(), d.end());
  return cdf_of_sorted(d);
}

// ---------------------------------------------------------------------------
// Pooling across seeds
// ---------------------------------------------------------------------------

struct ClassTotals {
  std::uint64_t devices = 0;
  std::uint64_t successes = 0;
  std::uint64_t msg1_total = 0;  // over all devices, failed ones included
  std::int64_t delay_total = 0;  // ticks, successful devices

  ClassTotals& operator+=(const ClassTotals& o) {
    devices += o.devices;
    successes += o.successes;
    msg1_total += o.msg1_total;
    delay_total += o.delay_total;
    return *this;
  }
  friend bool operator==(const ClassTotals&, const ClassTotals&) = default;
};

/// Count-level summary of one or more runs of the same scenario. Everything
/// is an integer or a sorted sample, so merging is exact, commutative and
/// associative.
struct KpiPool {
  std::string scenario_key;  // canonical scenario text without the seed
  std::string name;
  std::uint64_t n_seeds = 0;
  OpportunityTally cells;
  std::array<ClassTotals, 2> classes{};
  std::array<std::vector<Tick>, 2> delays;  // ascending, successful devices

  friend bool operator==(const KpiPool&, const KpiPool&) = default;
};

inline KpiPool pool_from_run(const Scenario& sc, const SimulationResult& res) {
  KpiPool p;
  p.scenario_key = serialize_scenario(sc, /*include_seed=*/false);
  p.name = sc.name;
  p.n_seeds = 1;
  p.cells = tally_opportunities(res.opportunities);
  for (const AccessRecord& r : res.records) {
    ClassTotals& c = p.classes[class_index(r.cls)];
    ++c.devices;
    c.msg1_total += static_cast<std::uint64_t>(r.msg1_count);
    if (r.success) {
      ++c.successes;
      c.delay_total += r.t_total();
      p.delays[class_index(r.cls)].push_back(r.t_total());
    }
  }
  for (auto& d : p.delays) std::sort(d.begin(), d.end());
  return p;
}

inline KpiPool merge(const KpiPool& a, const KpiPool& b) {
  if (a.scenario_key != b.scenario_key) throw KpiError("cannot merge reports of different scenarios");
  KpiPool out;
  out.scenario_key = a.scenario_key;
  out.name = a.name;
  out.n_seeds = a.n_seeds + b.n_seeds;
  out.cells = a.cells;
  out.cells += b.cells;
  for (std::size_t c = 0; c < 2; ++c) {
    out.classes[c] = a.classes[c];
    out.classes[c] += b.classes[c];
    out.delays[c].resize(a.delays[c].size() + b.delays[c].size());
    std::merge(a.delays[c].begin(), a.delays[c].end(), b.delays[c].begin(), b.delays[c].end(), out.delays[c].begin());
  }
  return out;
}

inline KpiPool merge(std::span<const KpiPool> pools) {
  if (pools.empty()) throw KpiError("nothing to merge");
  KpiPool out = pools[0];
  for (std::size_t i = 1; i < pools.size(); ++i) out = merge(out, pools[i]);
  return out;
}

inline std::vector<Tick> all_delays(const KpiPool& p) {
  std::vector<Tick> d(p.delays[0].size() + p.delays[1].size());
  std::merge(p.delays[0].begin(), p.delays[0].end(), p.delays[1].begin(), p.delays[1].end(), d.begin());
  return d;
}

struct ClassKpi {
  std::uint64_t devices = 0;
  std::uint64_t successes = 0;
  std::optional<double> success_rate;
  std::optional<double> collision_probability;  // collided cells involving the class / all cells
  std::optional<double> utilization;            // cells used by the class / all cells
  std::optional<double> mean_msg1_count;
  std::optional<double> mean_delay_ms;
  Percentiles delay;
};

struct KpiReport {
  std::string scenario;
  std::string seed_label;
  std::uint64_t n_seeds = 0;
  std::uint64_t n_devices = 0;
  std::uint64_t n_successes = 0;
  std::uint64_t n_opportunities = 0;
  std::optional<double> success_rate;
  std::optional<double> collision_probability;
  std::optional<double> collision_reserved;
  std::optional<double> collision_contention;
  Utilization utilization;
  std::optional<double> mean_msg1_count;
  std::optional<double> mean_delay_ms;
  Percentiles delay;
  ClassKpi urllc;
  ClassKpi non_urllc;
};

inline KpiReport make_report(const KpiPool& p, std::string seed_label) {
  KpiReport r;
  r.scenario = p.name;
  r.seed_label = std::move(seed_label);
  r.n_seeds = p.n_seeds;
  const OpportunityTally& t = p.cells;
  r.n_opportunities = t.n_opportunities;
  r.collision_probability = ratio(t.overall.collided, t.overall.cells);
  r.collision_reserved = ratio(t.reserved.collided, t.reserved.cells);
  r.collision_contention = ratio(t.contention.collided, t.contention.cells);
  r.utilization = utilization_from(t);

  ClassTotals all = p.classes[0];
  all += p.classes[1];
  r.n_devices = all.devices;
  r.n_successes = all.successes;
  r.success_rate = ratio(all.successes, all.devices);
  r.mean_msg1_count = ratio(all.msg1_total, all.devices);
  if (all.successes > 0)
    r.mean_delay_ms = ticks_to_ms(1) * static_cast<double>(all.delay_total) / static_cast<double>(all.successes);
  r.delay = percentiles_of(all_delays(p));

  auto fill = [&](ClassKpi& k, DeviceClass cls) {
    const std::size_t c = class_index(cls);
    const ClassTotals& ct = p.classes[c];
    k.devices = ct.devices;
    k.successes = ct.successes;
    k.success_rate = ratio(ct.successes, ct.devices);
    k.collision_probability = ratio(t.collided_with_class[c], t.overall.cells);
    k.utilization = ratio(t.used_by_class[c], t.overall.cells);
    k.mean_msg1_count = ratio(ct.msg1_total, ct.devices);
    if (ct.successes > 0)
      k.mean_delay_ms = ticks_to_ms(1) * static_cast<double>(ct.delay_total) / static_cast<double>(ct.successes);
    k.delay = percentiles_of(p.delays[c]);
  };
  fill(r.urllc, DeviceClass::urllc);
  fill(r.non_urllc, DeviceClass::non_urllc);
  return r;
}

}  // namespace rachsim
