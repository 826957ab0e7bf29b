#pragma once

// Seed and parameter sweeps.
//
//   sweep n_femto=0,5,8,10,12 seeds=1..20
//
// Each `key=v1,v2,...` token adds an axis; cells are the Cartesian product of
// the axes in the order given. `seeds=a..b` (inclusive) or `seeds=a` picks the
// replications. Every cell yields one row per seed followed by a pooled row.

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include "rachsim/config.hpp"
#include "rachsim/engine.hpp"
#include "rachsim/kpi.hpp"
#include "rachsim/report_io.hpp"

namespace rachsim {

class SweepError : public std::runtime_error {
 public:
  explicit SweepError(const std::string& what) : std::runtime_error("invalid sweep: " + what) {}
};

struct SweepAxis {
  std::string key;  // canonical key name
  std::vector<std::string> values;
};

struct SweepSpec {
  std::vector<SweepAxis> axes;
  std::uint64_t seed_first = 1;
  std::uint64_t seed_last = 1;

  std::size_t n_seeds() const { return static_cast<std::size_t>(seed_last - seed_first + 1); }
};

namespace detail {

inline std::uint64_t parse_seed(std::string_view v) {
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (v.empty() || res.ec != std::errc{} || res.ptr != v.data() + v.size())
    throw SweepError("seed '" + std::string(v) + "' is not a non-negative integer");
  return out;
}

}  // namespace detail

/// `default_seed` applies when no `seeds=` token is present.
inline SweepSpec parse_sweep(const std::vector<std::string>& tokens, std::uint64_t default_seed = 1) {
  SweepSpec spec;
  spec.seed_first = spec.seed_last = default_seed;
  bool seeds_seen = false;
  for (const std::string& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw SweepError("expected key=v1,v2,... or seeds=a..b, got '" + tok + "'");
    const std::string_view key = detail::trim(std::string_view(tok).substr(0, eq));
    const std::string_view rhs = detail::trim(std::string_view(tok).substr(eq + 1));
    if (rhs.empty()) throw SweepError("no values given for '" + std::string(key) + "'");

    if (key == "seeds") {
      if (seeds_seen) throw SweepError("seeds given twice");
      seeds_seen = true;
      const auto dots = rhs.find("..");
      if (dots == std::string_view::npos) {
        spec.seed_first = spec.seed_last = detail::parse_seed(rhs);
      } else {
        spec.seed_first = detail::parse_seed(rhs.substr(0, dots));
        spec.seed_last = detail::parse_seed(rhs.substr(dots + 2));
        if (spec.seed_last < spec.seed_first)
          throw SweepError("seed range " + std::string(rhs) + " is empty (expected a..b with a <= b)");
      }
      continue;
    }

    const ScenarioKey* k = find_key(key);
    if (k == nullptr) throw ConfigError("unknown key '" + std::string(key) + "'");
    if (k->name == "seed") throw SweepError("use seeds=a..b to sweep seeds");
    for (const auto& a : spec.axes)
      if (a.key == k->name) throw SweepError("parameter '" + k->name + "' swept twice");

    SweepAxis axis{k->name, {}};
    // Enhancement sets contain commas themselves; separate them with '/' or ';'.
    const char* seps = k->name == "enhancements" ? ";/" : ",";
    std::string_view rest = rhs;
    while (true) {
      const auto cut = rest.find_first_of(seps);
      const std::string_view v = detail::trim(rest.substr(0, cut));
      if (v.empty()) throw SweepError("empty value in '" + tok + "'");
      axis.values.emplace_back(v);
      if (cut == std::string_view::npos) break;
      rest = rest.substr(cut + 1);
    }
    spec.axes.push_back(std::move(axis));
  }
  return spec;
}

struct SweepCell {
  std::vector<std::pair<std::string, std::string>> settings;
  Scenario scenario;  // seed left at the base value

  std::string label() const {
    std::string out;
    for (const auto& [k, v] : settings) {
      if (!out.empty()) out += ';';
      out += k + "=" + v;
    }
    return out;
  }
};

/// Cartesian product of the axes applied to `base`; every cell is validated.
inline std::vector<SweepCell> expand_sweep(const Scenario& base, const SweepSpec& spec) {
  std::vector<std::vector<std::pair<std::string, std::string>>> combos{{}};
  for (const auto& axis : spec.axes) {
    std::vector<std::vector<std::pair<std::string, std::string>>> next;
    for (const auto& c : combos) {
      for (const auto& v : axis.values) {
        auto e = c;
        e.emplace_back(axis.key, v);
        next.push_back(std::move(e));
      }
    }
    combos = std::move(next);
  }
  std::vector<SweepCell> cells;
  for (auto& c : combos) {
    SweepCell cell;
    cell.scenario = with_settings(base, c);
    cell.settings = std::move(c);
    cells.push_back(std::move(cell));
  }
  return cells;
}

/// Calls fn(i) for i in [0, n) on up to `threads` workers; rethrows the first
/// exception after all workers stop.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    while (true) {
      const std::size_t job = next.fetch_add(1);
      if (job >= n) return;
      try {
        fn(job);
      } catch (...) {
        std::lock_guard lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);
}

struct SweepRow {
  std::string params;
  KpiReport report;
};

/// Runs every (cell, seed) job on `threads` workers. Rows come back in cell
/// order, seeds ascending, each cell closed by its pooled row, independent of
/// scheduling.
inline std::vector<SweepRow> run_sweep(const Scenario& base, const SweepSpec& spec, unsigned threads = 1) {
  const std::vector<SweepCell> cells = expand_sweep(base, spec);
  const std::size_t n_seeds = spec.n_seeds();
  std::vector<KpiPool> pools(cells.size() * n_seeds);

  parallel_for(pools.size(), threads, [&](std::size_t job) {
    Scenario sc = cells[job / n_seeds].scenario;
    sc.seed = spec.seed_first + job % n_seeds;
    pools[job] = pool_from_run(sc, run(sc));
  });

  std::vector<SweepRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const std::string label = cells[c].label();
    const auto first = pools.begin() + static_cast<std::ptrdiff_t>(c * n_seeds);
    for (std::size_t s = 0; s < n_seeds; ++s)
      rows.push_back({label, make_report(first[static_cast<std::ptrdiff_t>(s)], std::to_string(spec.seed_first + s))});
    rows.push_back({label, make_report(merge(std::span<const KpiPool>(&*first, n_seeds)), "pooled")});
  }
  return rows;
}

/// Pooled report of one scenario over seeds [first, last].
inline KpiPool run_pooled(Scenario sc, std::uint64_t first, std::uint64_t last, unsigned threads = 1) {
  SweepSpec spec;
  spec.seed_first = first;
  spec.seed_last = last;
  std::vector<KpiPool> pools(spec.n_seeds());
  parallel_for(pools.size(), threads, [&](std::size_t job) {
    Scenario s = sc;
    s.seed = first + job;
    pools[job] = pool_from_run(s, run(s));
  });
  return merge(pools);
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
  os << "params," << report_header() << '\n';
  for (const auto& r : rows) os << detail::csv_escape(r.params) << ',' << report_row(r.report) << '\n';
}

}  // namespace rachsim
