#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "reefmap/evaluate.hpp"
#include "reefmap/sim_world.hpp"

using namespace reefmap;
using namespace reefmap::eval;

namespace {

constexpr float kNanF = std::numeric_limits<float>::quiet_NaN();

// Small fully-observed grid with prescribed fused heights and bounds.
io::GridData make_grid(int n, double res, double value, double margin) {
  io::GridData g = io::GridData::allocate(n, n, res, 0.0, 0.0);
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    g.height[i] = static_cast<float>(value);
    g.fused_height[i] = static_cast<float>(value);
    g.h_min[i] = static_cast<float>(value - margin);
    g.h_max[i] = static_cast<float>(value + margin);
    g.height_variance[i] = 0.01f;
    g.horizontal_variance[i] = 0.0001f;
    g.observed[i] = 1.0f;
  }
  return g;
}

io::ScenarioConfig small_scenario() {
  io::ScenarioConfig cfg;
  cfg.world.terrain = "undulating";
  cfg.trajectory.x_end = 2.0;
  cfg.trajectory.step = 0.25;
  cfg.camera.width = 96;
  cfg.camera.height = 64;
  cfg.camera.tilt_down_deg = 35.0;
  cfg.seed = 3;
  return cfg;
}

} // namespace

TEST_CASE("error_map is zero on identical grids and uniform under a shift") {
  const auto truth = make_grid(20, 0.1, -1.0, 0.2);
  auto fused = truth;

  const auto zero = error_map(fused, truth);
  CHECK(zero.stats.count == 400);
  CHECK(zero.stats.max_error == 0.0);
  CHECK(zero.stats.rmse == 0.0);

  for (auto& h : fused.fused_height) h += 0.1f;
  for (auto& h : fused.height) h += 0.1f;
  const auto shifted = error_map(fused, truth);
  CHECK(shifted.stats.max_error == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(shifted.stats.mean_error == doctest::Approx(0.1).epsilon(1e-6));
  CHECK(shifted.stats.rmse == doctest::Approx(0.1).epsilon(1e-6));

  // |a-b| = |b-a| cell by cell.
  const auto reverse = error_map(truth, fused);
  for (std::size_t i = 0; i < shifted.abs_error.size(); ++i) {
    CHECK(shifted.abs_error[i] == doctest::Approx(reverse.abs_error[i]));
  }

  auto mismatched = make_grid(10, 0.1, -1.0, 0.2);
  CHECK_THROWS_AS((void)error_map(mismatched, truth), std::invalid_argument);
}

TEST_CASE("stats ignore unobserved cells") {
  const auto truth = make_grid(8, 0.1, 0.0, 0.1);
  auto fused = truth;
  fused.observed[3] = 0.0f;
  fused.fused_height[3] = kNanF;
  fused.fused_height[10] += 0.5f;
  const auto em = error_map(fused, truth);
  CHECK(em.stats.count == 63);
  CHECK(em.stats.max_error == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(!em.mask[3]);
}

TEST_CASE("region_stats restricts to the corridor") {
  const auto truth = make_grid(21, 0.1, 0.0, 0.1);  // spans y in [0, 2]
  auto fused = truth;
  // Perturb one cell inside |y - 1| <= 0.5 and one outside.
  const std::size_t inside = 10 * 21 + 5;
  const std::size_t outside = 20 * 21 + 5;
  fused.fused_height[inside] += 0.3f;
  fused.fused_height[outside] += 0.9f;
  const auto em = error_map(fused, truth);
  const auto corridor = region_stats(em, Region::corridor(1.0, 0.5));
  CHECK(corridor.max_error == doctest::Approx(0.3).epsilon(1e-6));
  CHECK(em.stats.max_error == doctest::Approx(0.9).epsilon(1e-6));
  CHECK(corridor.count == 21 * 11);
}

TEST_CASE("cross_section extracts the nearest row with bounds and truth") {
  auto truth = make_grid(10, 0.2, 0.0, 0.1);
  auto fused = make_grid(10, 0.2, -0.5, 0.2);
  const auto cs = cross_section(fused, truth, 'y', 0.61);
  REQUIRE(cs.samples.size() == 10);
  for (std::size_t i = 0; i < cs.samples.size(); ++i) {
    const auto& s = cs.samples[i];
    CHECK(s.h_est == doctest::Approx(-0.5));
    CHECK(s.h_min == doctest::Approx(-0.7));
    CHECK(s.h_max == doctest::Approx(-0.3));
    CHECK(s.h_true == doctest::Approx(0.0));
    if (i > 0) CHECK(s.coord > cs.samples[i - 1].coord);
  }
  CHECK_THROWS_AS((void)cross_section(fused, truth, 'y', 5.0), std::out_of_range);
  CHECK_THROWS_AS((void)cross_section(fused, truth, 'z', 0.0), std::invalid_argument);

  // Fixed-x sections walk the other axis.
  const auto cx = cross_section(fused, truth, 'x', 1.2);
  REQUIRE(cx.samples.size() == 10);
  for (std::size_t i = 1; i < cx.samples.size(); ++i) {
    CHECK(cx.samples[i].coord > cx.samples[i - 1].coord);
    CHECK(cx.samples[i].h_est == doctest::Approx(-0.5));
  }
}

TEST_CASE("bounds_coverage counts truth containment") {
  const auto truth = make_grid(12, 0.1, 0.0, 0.1);
  auto fused = make_grid(12, 0.1, 0.0, 0.1);
  CHECK(bounds_coverage(fused, truth) == doctest::Approx(1.0));

  // Collapse the bounds away from the truth.
  for (std::size_t i = 0; i < fused.cell_count(); ++i) {
    fused.h_min[i] = fused.h_max[i] = 0.5f;
  }
  CHECK(bounds_coverage(fused, truth) == doctest::Approx(0.0));

  // Saturation: bounds wide enough to span any truth value.
  for (std::size_t i = 0; i < fused.cell_count(); ++i) {
    fused.h_min[i] = -100.0f;
    fused.h_max[i] = 100.0f;
  }
  CHECK(bounds_coverage(fused, truth) == doctest::Approx(1.0));
}

TEST_CASE("cross_section agrees with bounds_coverage on its row") {
  const auto cfg = small_scenario();
  const auto res = sim::run_scenario(cfg);
  const auto snap = res.map.snapshot(&res.fused);

  const auto cs = cross_section(snap, res.truth, 'y', 0.0);
  std::size_t inside = 0;
  for (const auto& s : cs.samples) {
    if (s.h_true >= s.h_min && s.h_true <= s.h_max) ++inside;
  }
  const double row_half = snap.resolution / 2.0;
  const auto row_region = Region::corridor(
      snap.origin_y +
          std::floor((0.0 - snap.origin_y) / snap.resolution + 0.5) *
              snap.resolution,
      row_half * 0.99);
  const double cov = bounds_coverage(snap, res.truth, row_region);
  REQUIRE(!cs.samples.empty());
  CHECK(cov == doctest::Approx(static_cast<double>(inside) /
                               static_cast<double>(cs.samples.size()))
                   .epsilon(1e-12));
}

TEST_CASE("error_map values agree with cross_section at shared cells") {
  const auto cfg = small_scenario();
  const auto res = sim::run_scenario(cfg);
  const auto snap = res.map.snapshot(&res.fused);
  const auto em = error_map(snap, res.truth);
  const auto cs = cross_section(snap, res.truth, 'y', 0.1);
  const int row = static_cast<int>(
      std::floor((0.1 - snap.origin_y) / snap.resolution + 0.5));
  for (const auto& s : cs.samples) {
    const int col = static_cast<int>(
        std::floor((s.coord - snap.origin_x) / snap.resolution + 0.5));
    const std::size_t idx = static_cast<std::size_t>(row) * snap.cells_x + col;
    REQUIRE(em.mask[idx]);
    CHECK(std::abs(s.h_est - s.h_true) ==
          doctest::Approx(em.abs_error[idx]).epsilon(1e-12));
  }
}

TEST_CASE("degradation_sweep is monotone with exact endpoints") {
  auto cfg = small_scenario();
  cfg.noise.sample = false;
  const std::vector<double> eps = {0.0, 0.25, 0.5, 1.0};
  const auto rows = degradation_sweep(cfg, eps);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].mean_sigma2_z == 0.0);    // one-hot classification
  CHECK(rows[3].mean_sigma2_z == 1.25);   // uniform pdf variance, exact
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].mean_sigma2_z > rows[i - 1].mean_sigma2_z);
  }
  CHECK_THROWS_AS((void)degradation_sweep(cfg, {1.5}), io::config_error);
}

TEST_CASE("heatmap export writes the pgm with its sidecar") {
  const auto truth = make_grid(6, 0.1, 0.0, 0.1);
  auto fused = make_grid(6, 0.1, 0.25, 0.1);
  const auto em = error_map(fused, truth);
  const auto dir = std::filesystem::temp_directory_path() / "reefmap_eval_test";
  std::filesystem::create_directories(dir);
  write_error_heatmap(em, dir / "err.pgm");
  CHECK(std::filesystem::exists(dir / "err.pgm"));
  CHECK(std::filesystem::exists(dir / "err.pgm.txt"));
  std::filesystem::remove_all(dir);
}
