#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rachsim/random.hpp"

namespace rachsim {

struct Point {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

inline double thermal_noise_dbm(double bw_mhz, double noise_figure_db = 0.0) {
  return -174.0 + 10.0 * std::log10(bw_mhz * 1e6) + noise_figure_db;
}

struct TopologyConfig {
  int n_macro_cells = 3;
  double cell_radius_m = 50.0;
  int n_femto_cells = 0;
  double femto_radius_m = 10.0;
  double pl_ref_db = 63.57;
  double pl_ref_dist_m = 15.0;
  double pl_exponent = 3.44;
  double p_max_dbm = 14.0;
  double p_init_target_dbm = -104.0;
  double ramp_step_db = 2.0;
  // Thermal noise over bw_mhz with 0 dB noise figure unless overridden.
  std::optional<double> noise_power_dbm;
  double freq_ghz = 2.6;
  double bw_mhz = 5.0;

  double noise_dbm() const { return noise_power_dbm ? *noise_power_dbm : thermal_noise_dbm(bw_mhz); }
};

struct CellLayout {
  std::vector<Point> macro;
  std::vector<Point> femto;
  double cell_radius_m = 0.0;
  double femto_radius_m = 0.0;

  // gNB index space: macro cells first, then femto cells.
  int n_gnbs() const { return static_cast<int>(macro.size() + femto.size()); }
  int femto_gnb(int femto_index) const { return static_cast<int>(macro.size()) + femto_index; }
  Point gnb_position(int gnb) const {
    const auto m = static_cast<int>(macro.size());
    return gnb < m ? macro[static_cast<std::size_t>(gnb)] : femto[static_cast<std::size_t>(gnb - m)];
  }
};

struct Placement {
  Point position;
  int serving_cell = 0;            // macro index
  std::optional<int> femto_cell;   // femto index, when covered
};

// Centers of the macro cluster, centroid at the origin. Three cells sit on an
// equilateral triangle with side 2 R cos(30 deg), i.e. hexagonal adjacency.
inline std::vector<Point> macro_centers(int n_cells, double radius) {
  if (n_cells == 1) return {Point{0.0, 0.0}};
  if (n_cells != 3) throw std::invalid_argument("n_macro_cells must be 1 or 3");
  const double spacing = 2.0 * radius * std::cos(std::numbers::pi / 6.0);
  const double circumradius = spacing / std::sqrt(3.0);
  std::vector<Point> out;
  for (int k = 0; k < 3; ++k) {
    const double theta = std::numbers::pi / 2.0 + k * 2.0 * std::numbers::pi / 3.0;
    out.push_back({circumradius * std::cos(theta), circumradius * std::sin(theta)});
  }
  return out;
}

inline int nearest(std::span<const Point> centers, Point p) {
  int best = 0;
  double best_d = distance(centers[0], p);
  for (std::size_t i = 1; i < centers.size(); ++i) {
    const double d = distance(centers[i], p);
    if (d < best_d) {
      best_d = d;
      best = static_cast<int>(i);
    }
  }
  return best;
}

template <typename Engine>
Point uniform_in_disc(Point center, double radius, Engine& eng) {
  const double r = radius * std::sqrt(uniform01(eng));
  const double theta = 2.0 * std::numbers::pi * uniform01(eng);
  return {center.x + r * std::cos(theta), center.y + r * std::sin(theta)};
}

/// Macro cluster plus femto centers drawn uniformly over the union of the
/// macro discs (rejection sampling from the bounding box).
inline CellLayout build_layout(const TopologyConfig& cfg, const RandomSource& rng) {
  CellLayout layout;
  layout.cell_radius_m = cfg.cell_radius_m;
  layout.femto_radius_m = cfg.femto_radius_m;
  layout.macro = macro_centers(cfg.n_macro_cells, cfg.cell_radius_m);

  double lo_x = layout.macro[0].x, hi_x = lo_x, lo_y = layout.macro[0].y, hi_y = lo_y;
  for (const Point& c : layout.macro) {
    lo_x = std::min(lo_x, c.x);
    hi_x = std::max(hi_x, c.x);
    lo_y = std::min(lo_y, c.y);
    hi_y = std::max(hi_y, c.y);
  }
  lo_x -= cfg.cell_radius_m;
  hi_x += cfg.cell_radius_m;
  lo_y -= cfg.cell_radius_m;
  hi_y += cfg.cell_radius_m;

  auto eng = rng.stream(Stream::placement, {0});
  while (static_cast<int>(layout.femto.size()) < cfg.n_femto_cells) {
    const Point p{lo_x + (hi_x - lo_x) * uniform01(eng), lo_y + (hi_y - lo_y) * uniform01(eng)};
    for (const Point& c : layout.macro) {
      if (distance(c, p) <= cfg.cell_radius_m) {
        layout.femto.push_back(p);
        break;
      }
    }
  }
  return layout;
}

inline Placement assign_cells(const CellLayout& layout, Point p) {
  Placement out;
  out.position = p;
  out.serving_cell = nearest(layout.macro, p);
  if (!layout.femto.empty()) {
    const int f = nearest(layout.femto, p);
    if (distance(layout.femto[static_cast<std::size_t>(f)], p) <= layout.femto_radius_m) out.femto_cell = f;
  }
  return out;
}

/// Places device k uniformly in the disc of macro cell (k mod n_cells); the
/// serving cell is then re-derived as the nearest macro center.
inline std::vector<Placement> place_devices(std::int64_t n, const CellLayout& layout, const RandomSource& rng) {
  std::vector<Placement> out;
  if (n <= 0) return out;
  out.reserve(static_cast<std::size_t>(n));
  auto eng = rng.stream(Stream::placement, {1});
  const auto cells = static_cast<std::int64_t>(layout.macro.size());
  for (std::int64_t k = 0; k < n; ++k) {
    const Point p = uniform_in_disc(layout.macro[static_cast<std::size_t>(k % cells)], layout.cell_radius_m, eng);
    out.push_back(assign_cells(layout, p));
  }
  return out;
}

/// Log-distance path loss; distances under the reference distance are clamped.
inline double path_loss_db(double d, const TopologyConfig& cfg) {
  if (!(d > 0.0)) throw std::domain_error("path_loss_db: distance must be positive");
  const double eff = std::max(d, cfg.pl_ref_dist_m);
  return cfg.pl_ref_db + 10.0 * cfg.pl_exponent * std::log10(eff / cfg.pl_ref_dist_m);
}

/// Open-loop power ramping for the C-th preamble attempt.
inline double ramped_tx_power_dbm(double pl_db, int attempt, const TopologyConfig& cfg) {
  if (attempt < 1) throw std::domain_error("ramped_tx_power_dbm: attempt count must be >= 1");
  return std::min(cfg.p_max_dbm, pl_db + cfg.p_init_target_dbm + (attempt - 1) * cfg.ramp_step_db);
}

inline double dbm_to_mw(double dbm) { return std::pow(10.0, dbm / 10.0); }
inline double mw_to_dbm(double mw) { return 10.0 * std::log10(mw); }

/// SINR of one received signal against noise plus the power sum of
/// interferers, all as received powers at the same gNB.
inline double sinr_db(double received_dbm, double noise_dbm, std::span<const double> interferer_rx_dbm) {
  // Summed in ascending order so the result does not depend on list order.
  std::vector<double> sorted(interferer_rx_dbm.begin(), interferer_rx_dbm.end());
  std::sort(sorted.begin(), sorted.end());
  double interference_mw = 0.0;
  for (double i : sorted) interference_mw += dbm_to_mw(i);
  return received_dbm - mw_to_dbm(dbm_to_mw(noise_dbm) + interference_mw);
}

/// One uplink preamble transmission, as seen by the PHY abstraction.
struct Emitter {
  Point position;
  int serving_cell = 0;
  double tx_power_dbm = 0.0;
};

/// SINR at `target`'s serving gNB. Only emitters served by other cells count as
/// interference (same-cell preambles are orthogonal).
inline double sinr_db(const Emitter& target, std::span<const Emitter> concurrent, const CellLayout& layout,
                      const TopologyConfig& cfg) {
  const Point gnb = layout.macro[static_cast<std::size_t>(target.serving_cell)];
  const double rx = target.tx_power_dbm - path_loss_db(distance(target.position, gnb), cfg);
  std::vector<double> interferers;
  for (const Emitter& e : concurrent) {
    if (e.serving_cell == target.serving_cell) continue;
    interferers.push_back(e.tx_power_dbm - path_loss_db(distance(e.position, gnb), cfg));
  }
  return sinr_db(rx, cfg.noise_dbm(), interferers);
}

}  // namespace rachsim
