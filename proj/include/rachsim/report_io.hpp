#pragma once

// Output formats. Column orders here are part of the file formats and only
// ever grow at the end.

#include <cstdio>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rachsim/config.hpp"
#include "rachsim/engine.hpp"
#include "rachsim/kpi.hpp"
#include "rachsim/topology.hpp"

namespace rachsim {

namespace detail {

inline std::string field(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

// Quotes a CSV field only when needed.
inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace detail

inline const std::vector<std::string>& report_columns() {
  static const std::vector<std::string> cols = {
      "scenario",          "seed",               "n_seeds",           "n_devices",
      "n_successes",       "success_rate",       "n_opportunities",   "collision_prob",
      "collision_reserved", "collision_contention", "util_overall",    "util_reserved",
      "util_contention",   "mean_msg1",          "mean_delay_ms",     "p50_ms",
      "p95_ms",            "p99_ms",             "p9999_ms",          "urllc_devices",
      "urllc_success_rate", "urllc_collision",   "urllc_util",        "urllc_mean_msg1",
      "urllc_mean_delay_ms", "urllc_p50_ms",     "urllc_p95_ms",      "urllc_p99_ms",
      "urllc_p9999_ms",    "non_urllc_devices",  "non_urllc_success_rate", "non_urllc_collision",
      "non_urllc_util",    "non_urllc_mean_msg1", "non_urllc_mean_delay_ms", "non_urllc_p50_ms",
      "non_urllc_p95_ms",  "non_urllc_p99_ms",   "non_urllc_p9999_ms",
  };
  return cols;
}

inline std::string report_header() {
  std::string out;
  for (const auto& c : report_columns()) {
    if (!out.empty()) out += ',';
    out += c;
  }
  return out;
}

/// One CSV row in report_columns() order. Ratios are fractions, absent
/// values are empty fields.
inline std::string report_row(const KpiReport& r) {
  using detail::field;
  std::vector<std::string> f;
  f.push_back(detail::csv_escape(r.scenario));
  f.push_back(r.seed_label);
  f.push_back(std::to_string(r.n_seeds));
  f.push_back(std::to_string(r.n_devices));
  f.push_back(std::to_string(r.n_successes));
  f.push_back(field(r.success_rate));
  f.push_back(std::to_string(r.n_opportunities));
  f.push_back(field(r.collision_probability));
  f.push_back(field(r.collision_reserved));
  f.push_back(field(r.collision_contention));
  f.push_back(field(r.utilization.overall));
  f.push_back(field(r.utilization.reserved));
  f.push_back(field(r.utilization.contention));
  f.push_back(field(r.mean_msg1_count));
  f.push_back(field(r.mean_delay_ms));
  for (int bp : kPercentileBp) f.push_back(field(r.delay.at(bp)));
  for (const ClassKpi* k : {&r.urllc, &r.non_urllc}) {
    f.push_back(std::to_string(k->devices));
    f.push_back(field(k->success_rate));
    f.push_back(field(k->collision_probability));
    f.push_back(field(k->utilization));
    f.push_back(field(k->mean_msg1_count));
    f.push_back(field(k->mean_delay_ms));
    for (int bp : kPercentileBp) f.push_back(field(k->delay.at(bp)));
  }
  std::string out;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) out += ',';
    out += f[i];
  }
  return out;
}

inline void write_report_csv(std::ostream& os, const std::vector<KpiReport>& rows) {
  os << report_header() << '\n';
  for (const auto& r : rows) os << report_row(r) << '\n';
}

/// Aligned human-readable summary.
inline void print_report(std::ostream& os, const KpiReport& r) {
  auto pct = [](const std::optional<double>& v) -> std::string {
    if (!v) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << *v * 100.0 << " %";
    return s.str();
  };
  auto ms = [](const std::optional<double>& v) -> std::string {
    if (!v) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << *v << " ms";
    return s.str();
  };
  auto num = [](const std::optional<double>& v) -> std::string {
    if (!v) return "n/a";
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << *v;
    return s.str();
  };
  auto line = [&os](const std::string& k, const std::string& v) {
    os << "  " << std::left << std::setw(28) << k << v << '\n';
  };
  os << r.scenario << " (seed " << r.seed_label << ", " << r.n_seeds << " run" << (r.n_seeds == 1 ? "" : "s")
     << ")\n";
  line("devices", std::to_string(r.n_devices));
  line("success rate", pct(r.success_rate));
  line("RA opportunities", std::to_string(r.n_opportunities));
  line("collision probability", pct(r.collision_probability));
  line("  reserved pool", pct(r.collision_reserved));
  line("  contention pool", pct(r.collision_contention));
  line("preamble utilization", pct(r.utilization.overall));
  line("  reserved pool", pct(r.utilization.reserved));
  line("  contention pool", pct(r.utilization.contention));
  line("mean Msg-1 transmissions", num(r.mean_msg1_count));
  line("mean access delay", ms(r.mean_delay_ms));
  line("delay p50 / p95", ms(r.delay.p50) + " / " + ms(r.delay.p95));
  line("delay p99 / p99.99", ms(r.delay.p99) + " / " + ms(r.delay.p9999));
  for (const auto& [label, k] : {std::pair<const char*, const ClassKpi*>{"uRLLC", &r.urllc}, {"non-uRLLC", &r.non_urllc}}) {
    if (k->devices == 0) continue;
    os << "  " << label << ":\n";
    line("  devices", std::to_string(k->devices));
    line("  collision probability", pct(k->collision_probability));
    line("  utilization", pct(k->utilization));
    line("  mean access delay", ms(k->mean_delay_ms));
    line("  delay p99.99", ms(k->delay.p9999));
  }
}

inline void write_cdf_csv(std::ostream& os, const std::vector<CdfPoint>& points) {
  os << "delay_ms,cum_prob\n";
  for (const auto& p : points) os << detail::format_double(p.delay_ms) << ',' << detail::format_double(p.cum_prob) << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<TraceEvent>& events) {
  os << "time_ms,device,event,preamble,gnb,attempt\n";
  for (const auto& e : events) {
    os << detail::format_double(ticks_to_ms(e.time)) << ',' << e.device << ',' << to_string(e.kind) << ',';
    if (e.preamble >= 0) os << e.preamble;
    os << ',';
    if (e.gnb >= 0) os << e.gnb;
    os << ',' << e.attempt << '\n';
  }
}

/// Devices with class, cell assignment and path loss to the serving macro.
/// Cell centers follow as rows with an empty class field and `macro`/`femto`
/// in the device column.
inline void write_layout_csv(std::ostream& os, const CellLayout& layout, const std::vector<DeviceSpec>& devices,
                             const TopologyConfig& cfg) {
  os << "device,x_m,y_m,class,serving_cell,femto_cell,pl_db\n";
  for (const auto& d : devices) {
    const Point c = layout.macro[static_cast<std::size_t>(d.placement.serving_cell)];
    const double dist = std::max(distance(d.placement.position, c), 1e-3);
    os << d.id << ',' << detail::format_double(d.placement.position.x) << ','
       << detail::format_double(d.placement.position.y) << ',' << to_string(d.cls) << ','
       << d.placement.serving_cell << ',';
    if (d.placement.femto_cell) os << *d.placement.femto_cell;
    os << ',' << detail::format_double(path_loss_db(dist, cfg)) << '\n';
  }
  for (std::size_t i = 0; i < layout.macro.size(); ++i)
    os << "macro," << detail::format_double(layout.macro[i].x) << ',' << detail::format_double(layout.macro[i].y)
       << ",," << i << ",,\n";
  for (std::size_t i = 0; i < layout.femto.size(); ++i)
    os << "femto," << detail::format_double(layout.femto[i].x) << ',' << detail::format_double(layout.femto[i].y)
       << ",,," << i << ",\n";
}

}  // namespace rachsim
