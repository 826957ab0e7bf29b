#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "rachsim/topology.hpp"

using namespace rachsim;

namespace {

Point rotate(Point p, Point about, double rad) {
  const double dx = p.x - about.x, dy = p.y - about.y;
  return {about.x + dx * std::cos(rad) - dy * std::sin(rad), about.y + dx * std::sin(rad) + dy * std::cos(rad)};
}

}  // namespace

TEST(Layout, MacroCentersAreHexagonallySpaced) {
  const auto c = macro_centers(3, 50.0);
  ASSERT_EQ(c.size(), 3u);
  const double spacing = 2.0 * 50.0 * std::cos(std::numbers::pi / 6.0);
  EXPECT_NEAR(distance(c[0], c[1]), spacing, 1e-9);
  EXPECT_NEAR(distance(c[1], c[2]), spacing, 1e-9);
  EXPECT_NEAR(distance(c[0], c[2]), spacing, 1e-9);
  EXPECT_EQ(macro_centers(1, 50.0).size(), 1u);
  EXPECT_THROW(macro_centers(2, 50.0), std::invalid_argument);
}

TEST(Layout, NoFemtoCellsByDefault) {
  EXPECT_TRUE(build_layout(TopologyConfig{}, RandomSource(1)).femto.empty());
}

TEST(Layout, FemtoCentersLieInsideMacroCoverage) {
  TopologyConfig cfg;
  cfg.n_femto_cells = 10;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const CellLayout l = build_layout(cfg, RandomSource(seed));
    ASSERT_EQ(l.femto.size(), 10u);
    for (const Point& f : l.femto) {
      double best = 1e9;
      for (const Point& m : l.macro) best = std::min(best, distance(f, m));
      EXPECT_LE(best, 50.0);
    }
  }
}

TEST(Layout, DeterministicUnderSeed) {
  TopologyConfig cfg;
  cfg.n_femto_cells = 12;
  const CellLayout a = build_layout(cfg, RandomSource(3));
  const CellLayout b = build_layout(cfg, RandomSource(3));
  EXPECT_EQ(a.femto, b.femto);
  EXPECT_EQ(a.macro, b.macro);
  EXPECT_NE(a.femto, build_layout(cfg, RandomSource(4)).femto);
}

TEST(PlaceDevices, Empty) {
  EXPECT_TRUE(place_devices(0, build_layout({}, RandomSource(1)), RandomSource(1)).empty());
}

TEST(PlaceDevices, WithinServingCellRadius) {
  const CellLayout l = build_layout({}, RandomSource(1));
  const auto p = place_devices(15000, l, RandomSource(1));
  ASSERT_EQ(p.size(), 15000u);
  std::vector<int> per_cell(3, 0);
  for (const auto& d : p) {
    EXPECT_LE(distance(d.position, l.macro[static_cast<std::size_t>(d.serving_cell)]), 50.0);
    EXPECT_EQ(d.serving_cell, nearest(l.macro, d.position));
    EXPECT_FALSE(d.femto_cell);
    ++per_cell[static_cast<std::size_t>(d.serving_cell)];
  }
  // Overlapping discs hand some devices to a neighbour, but every cell keeps
  // most of its own.
  for (int c : per_cell) EXPECT_GT(c, 4000);
}

TEST(PlaceDevices, FemtoCoverageMatchesAreaRatio) {
  TopologyConfig cfg;
  cfg.n_femto_cells = 12;
  const double expected = 12.0 * cfg.femto_radius_m * cfg.femto_radius_m / (3.0 * 50.0 * 50.0);
  double sum = 0.0;
  const int layouts = 20;
  for (int s = 1; s <= layouts; ++s) {
    const CellLayout l = build_layout(cfg, RandomSource(static_cast<std::uint64_t>(s)));
    const auto p = place_devices(15000, l, RandomSource(static_cast<std::uint64_t>(s)));
    const auto covered = std::count_if(p.begin(), p.end(), [](const Placement& d) { return d.femto_cell.has_value(); });
    sum += static_cast<double>(covered) / static_cast<double>(p.size());
  }
  EXPECT_NEAR(sum / layouts, expected, 0.03);
}

TEST(PlaceDevices, RigidRotationPreservesMembership) {
  TopologyConfig cfg;
  cfg.n_femto_cells = 8;
  const CellLayout l = build_layout(cfg, RandomSource(11));
  const auto placed = place_devices(3000, l, RandomSource(11));

  // 60 degrees about a macro center: distances are preserved, so the
  // re-derived assignment is unchanged.
  const double a60 = std::numbers::pi / 3.0;
  CellLayout r = l;
  for (auto& c : r.macro) c = rotate(c, l.macro[0], a60);
  for (auto& f : r.femto) f = rotate(f, l.macro[0], a60);
  for (const auto& d : placed) {
    const Placement q = assign_cells(r, rotate(d.position, l.macro[0], a60));
    EXPECT_EQ(q.serving_cell, d.serving_cell);
    EXPECT_EQ(q.femto_cell, d.femto_cell);
  }

  // 120 degrees about the cluster centroid maps the cluster onto itself and
  // cell k onto cell k+1.
  const double a120 = 2.0 * std::numbers::pi / 3.0;
  CellLayout bare = l;
  bare.femto.clear();
  for (const auto& d : placed) {
    const Placement q = assign_cells(bare, rotate(d.position, {0.0, 0.0}, a120));
    EXPECT_EQ(q.serving_cell, (d.serving_cell + 1) % 3);
  }
}

TEST(PathLoss, ReferencePoint) { EXPECT_DOUBLE_EQ(path_loss_db(15.0, {}), 63.57); }

TEST(PathLoss, TenfoldDistance) { EXPECT_NEAR(path_loss_db(150.0, {}), 97.97, 1e-9); }

TEST(PathLoss, ClampsBelowReference) { EXPECT_DOUBLE_EQ(path_loss_db(10.0, {}), 63.57); }

TEST(PathLoss, RejectsNonPositiveDistance) {
  EXPECT_THROW(path_loss_db(0.0, {}), std::domain_error);
  EXPECT_THROW(path_loss_db(-1.0, {}), std::domain_error);
}

TEST(PathLoss, MonotoneNonDecreasing) {
  double prev = path_loss_db(0.1, {});
  for (double d = 0.5; d < 500.0; d += 0.5) {
    const double pl = path_loss_db(d, {});
    EXPECT_GE(pl, prev);
    prev = pl;
  }
}

TEST(TxPower, FirstAttempt) { EXPECT_DOUBLE_EQ(ramped_tx_power_dbm(90.0, 1, {}), -14.0); }

TEST(TxPower, TenthAttempt) { EXPECT_DOUBLE_EQ(ramped_tx_power_dbm(90.0, 10, {}), 4.0); }

TEST(TxPower, CappedAtMaximum) {
  for (int c = 1; c <= 10; ++c) EXPECT_DOUBLE_EQ(ramped_tx_power_dbm(130.0, c, {}), 14.0);
}

TEST(TxPower, RejectsAttemptZero) { EXPECT_THROW(ramped_tx_power_dbm(90.0, 0, {}), std::domain_error); }

TEST(TxPower, StepsAreZeroOrOneRampStep) {
  for (double pl = 60.0; pl <= 130.0; pl += 0.7)
    for (int c = 1; c < 20; ++c) {
      const double step = ramped_tx_power_dbm(pl, c + 1, {}) - ramped_tx_power_dbm(pl, c, {});
      EXPECT_GE(step, 0.0);
      EXPECT_LE(step, 2.0 + 1e-12);
      // Either a full step or a partial step into the cap.
      if (step < 2.0 - 1e-12) {
        EXPECT_DOUBLE_EQ(ramped_tx_power_dbm(pl, c + 1, {}), 14.0);
      }
    }
}

TEST(Sinr, InterferenceFree) { EXPECT_NEAR(sinr_db(-90.0, -110.0, {}), 20.0, 0.05); }

TEST(Sinr, InterfererAtNoiseLevelCostsThreeDecibels) {
  const std::vector<double> one{-110.0};
  EXPECT_NEAR(sinr_db(-90.0, -110.0, {}) - sinr_db(-90.0, -110.0, one), 10.0 * std::log10(2.0), 1e-9);
}

TEST(Sinr, PermutationInvariant) {
  std::vector<double> xs{-95.0, -120.0, -101.3, -88.8, -130.0, -99.9};
  const double ref = sinr_db(-80.0, -107.0, xs);
  std::sort(xs.begin(), xs.end());
  do {
    EXPECT_EQ(sinr_db(-80.0, -107.0, xs), ref);
  } while (std::next_permutation(xs.begin(), xs.end()));
}

TEST(Sinr, SameCellTransmittersDoNotInterfere) {
  const CellLayout l = build_layout({}, RandomSource(1));
  const TopologyConfig cfg;
  const Emitter target{{l.macro[0].x + 20.0, l.macro[0].y}, 0, 0.0};
  const std::vector<Emitter> same{{{l.macro[0].x - 20.0, l.macro[0].y}, 0, 14.0}};
  const std::vector<Emitter> other{{l.macro[1], 1, 14.0}};
  EXPECT_DOUBLE_EQ(sinr_db(target, same, l, cfg), sinr_db(target, {}, l, cfg));
  EXPECT_LT(sinr_db(target, other, l, cfg), sinr_db(target, {}, l, cfg));
}

TEST(Noise, ThermalOverFiveMegahertz) { EXPECT_NEAR(thermal_noise_dbm(5.0), -107.01, 0.01); }
