// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "reefmap/bench.hpp"
#include "reefmap/config.hpp"
#include "reefmap/elevation_map.hpp"
#include "reefmap/evaluate.hpp"
#include "reefmap/geometry.hpp"
#include "reefmap/range_sensor.hpp"
#include "reefmap/sim_world.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail, double secs) {
  std::printf("criterion %d: %s — %s (%.1f s)\n", criterion,
              pass ? "PASS" : "FAIL", detail.c_str(), secs);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void run_criterion(int criterion, Fn&& fn) {
  const auto t0 = Clock::now();
  bool pass = false;
  std::string detail;
  try {
    pass = fn(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(criterion, pass, detail, secs);
}

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list args;
  va_start(args, f);
  std::vsnprintf(buf, sizeof buf, f, args);
  va_end(args);
  return buf;
}

fs::path config_path(const char* name) {
  return fs::path(REEFMAP_CONFIG_DIR) / name;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::mt19937_64& rng() {
  static std::mt19937_64 gen(8086);
  return gen;
}

double uniform(double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng());
}

reefmap::geometry::Pose random_pose() {
  return reefmap::geometry::Pose(
      {uniform(-5, 5), uniform(-5, 5), uniform(-5, 5)},
      reefmap::geometry::Rotation(uniform(-3.1, 3.1), uniform(-1.2, 1.2),
                                  uniform(-3.1, 3.1)));
}

// 1. Range moment exactness for the half-near / half-free pdf.
bool criterion_moments(std::string& detail) {
  const auto scheme = reefmap::sensor::RangeClassScheme::defaults();
  const std::vector<double> pdf = {0.5, 0.0, 0.0, 0.5};
  const auto m = reefmap::sensor::pixel_range_moments(pdf, scheme);
  detail = fmt("mean %.15g (want 3.5), variance %.15g (want 2.25)", m.mean,
               m.variance);
  return std::abs(m.mean - 3.5) <= 1e-12 && std::abs(m.variance - 2.25) <= 1e-12;
}

// 2. Kalman fusion algebra over 1e4 random cases.
bool criterion_kalman(std::string& detail) {
  using reefmap::mapping::MapCell;
  using reefmap::mapping::update_cell;
  int violations = 0;
  for (int i = 0; i < 10000; ++i) {
    MapCell prior;
    prior.observed = true;
    prior.height = uniform(-10, 10);
    prior.height_variance = uniform(1e-4, 100.0);
    const double ha = uniform(-10, 10), va = uniform(1e-4, 100.0);
    const double hb = uniform(-10, 10), vb = uniform(1e-4, 100.0);

    const MapCell a = update_cell(prior, ha, va);
    if (a.height_variance > std::min(prior.height_variance, va) + 1e-10) ++violations;
    if (a.height < std::min(prior.height, ha) - 1e-10 ||
        a.height > std::max(prior.height, ha) + 1e-10) {
      ++violations;
    }
    const MapCell ab = update_cell(a, hb, vb);
    const MapCell ba = update_cell(update_cell(prior, hb, vb), ha, va);
    if (std::abs(ab.height - ba.height) > 1e-10 ||
        std::abs(ab.height_variance - ba.height_variance) > 1e-10) {
      ++violations;
    }
  }
  detail = fmt("10000 random fusions, %d violations (tolerance 1e-10)", violations);
  return violations == 0;
}

// 3. Jacobian fidelity against finite differences.
bool criterion_jacobians(std::string& detail) {
  using namespace reefmap::geometry;
  double worst_range = 0.0, worst_halving = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Pose pose = random_pose();
    const Vec3 p(uniform(-4, 4), uniform(-4, 4), uniform(-4, 4));
    const RowVec3 analytic = jacobian_range(p, pose);
    for (int k = 0; k < 3; ++k) {
      Vec3 lo = p, hi = p;
      lo(k) -= 1e-6;
      hi(k) += 1e-6;
      const double fd =
          (height_measurement(hi, pose) - height_measurement(lo, pose)) / 2e-6;
      worst_range = std::max(worst_range, std::abs(analytic(k) - fd));
    }
    const RowVec3 full = jacobian_rotation(p, pose, 1e-6);
    const RowVec3 half = jacobian_rotation(p, pose, 5e-7);
    worst_halving = std::max(worst_halving, (full - half).cwiseAbs().maxCoeff());
  }
  detail = fmt("1000 poses: |J_S - fd| max %.3g (limit 1e-6), step-halving "
               "max %.3g (limit 1e-7)",
               worst_range, worst_halving);
  return worst_range <= 1e-6 && worst_halving <= 1e-7;
}

struct RegionStats {
  double max_error;
  double mean_error;
  std::size_t count;
};

RegionStats combine(const reefmap::eval::ErrorStats& a,
                    const reefmap::eval::ErrorStats& b) {
  RegionStats out;
  out.count = a.count + b.count;
  out.max_error = std::max(a.max_error, b.max_error);
  out.mean_error =
      out.count == 0
          ? 0.0
          : (a.mean_error * a.count + b.mean_error * b.count) / out.count;
  return out;
}

// 4. Simulation 1: corridor accuracy plus the gap bridging artifact.
bool criterion_sim1(std::string& detail) {
  const auto cfg = reefmap::io::read_config(config_path("sim1_plateau_gap.ini"));
  const auto res = reefmap::sim::run_scenario(cfg);
  const auto snap = res.map.snapshot(&res.fused);
  const auto em = reefmap::eval::error_map(snap, res.truth);

  const auto corridor = reefmap::eval::region_stats(
      em, reefmap::eval::Region::corridor(cfg.trajectory.y, 0.5));

  const auto& w = cfg.world;
  const double inset_y = w.edge_width + 0.25;
  reefmap::eval::Region gap;
  gap.x0 = w.plateau_a_x1 + w.edge_width;
  gap.x1 = w.plateau_b_x0 - w.edge_width;
  gap.y0 = w.plateau_y0 + inset_y;
  gap.y1 = w.plateau_y1 - inset_y;
  const auto gap_stats = reefmap::eval::region_stats(em, gap);

  const double inset_x = w.edge_width + 0.35;
  reefmap::eval::Region top_a = gap, top_b = gap;
  top_a.x0 = w.plateau_a_x0 + inset_x;
  top_a.x1 = w.plateau_a_x1 - inset_x;
  top_b.x0 = w.plateau_b_x0 + inset_x;
  top_b.x1 = w.plateau_b_x1 - inset_x;
  const RegionStats tops = combine(reefmap::eval::region_stats(em, top_a),
                                   reefmap::eval::region_stats(em, top_b));

  detail = fmt("corridor max %.3f (limit 0.35); gap max %.3f mean %.3f over %zu "
               "cells vs plateau-top max %.3f mean %.3f over %zu cells",
               corridor.max_error, gap_stats.max_error, gap_stats.mean_error,
               gap_stats.count, tops.max_error, tops.mean_error, tops.count);
  const bool a = corridor.count > 100 && corridor.max_error <= 0.35;
  const bool b = gap_stats.count > 0 && tops.count > 0 &&
                 gap_stats.max_error > 1.0 &&
                 gap_stats.max_error > tops.max_error &&
                 gap_stats.mean_error > tops.mean_error;
  return a && b;
}

// 5. Simulation 2: corridor RMSE and confidence-bound coverage.
bool criterion_sim2(std::string& detail) {
  const auto cfg = reefmap::io::read_config(config_path("sim2_undulating.ini"));
  const auto res = reefmap::sim::run_scenario(cfg);
  const auto snap = res.map.snapshot(&res.fused);
  const auto em = reefmap::eval::error_map(snap, res.truth);
  const auto corridor_region = reefmap::eval::Region::corridor(cfg.trajectory.y, 0.5);
  const auto corridor = reefmap::eval::region_stats(em, corridor_region);
  const double coverage =
      reefmap::eval::bounds_coverage(snap, res.truth, corridor_region);
  detail = fmt("corridor rmse %.4f (limit 0.15), corridor coverage %.4f "
               "(limit 0.9) over %zu cells",
               corridor.rmse, coverage, corridor.count);
  return corridor.count > 100 && corridor.rmse <= 0.15 && coverage >= 0.9;
}

// 6. Degradation sweep: strictly increasing mean variance, exact endpoints.
bool criterion_sweep(std::string& detail) {
  auto cfg = reefmap::io::read_config(config_path("sim2_undulating.ini"));
  const std::vector<double> eps = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 1.0};
  const auto rows = reefmap::eval::degradation_sweep(cfg, eps);
  bool increasing = true;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) {
    if (!(rows[i].mean_sigma2_z > rows[i - 1].mean_sigma2_z)) increasing = false;
  }
  const double at0 = rows.front().mean_sigma2_z;
  const double at1 = rows.back().mean_sigma2_z;
  std::string values;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    values += fmt("%.4g ", rows[i].mean_sigma2_z);
  }
  detail = fmt("mean variance over eps 0..0.5: %s(strictly increasing: %s); "
               "endpoints %.17g at 0 and %.17g at 1",
               values.c_str(), increasing ? "yes" : "no", at0, at1);
  return increasing && at0 == 0.0 && std::abs(at1 - 1.25) <= 1e-12;
}

// 7. Update-path latency on the 5x5 m / 2 cm map with 512x384 input.
bool criterion_performance(std::string& detail) {
  const auto cfg = reefmap::io::read_config(config_path("sim2_undulating.ini"));
  const auto r = reefmap::bench::run_bench(cfg, 200);
  detail = fmt("sense+motion_update+integrate_scan median %.3f ms over %d "
               "frames (limit 20 ms); fuse separately %.1f ms",
               r.frame.median_ms, r.iterations, r.fuse.median_ms);
  return r.frame.median_ms < 20.0;
}

// 8. Determinism: repeated CLI runs produce byte-identical EGRID and CSV files.
bool criterion_determinism(std::string& detail) {
  const fs::path tmp =
      fs::temp_directory_path() /
      ("reefmap_accept_" + std::to_string(std::random_device{}()));
  fs::create_directories(tmp);
  const std::string cfg = config_path("sim2_undulating.ini").string();

  const auto cli = [&](const std::string& args) {
    const std::string cmd =
        std::string(REEFMAP_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str())) == 0;
  };
  bool ok = true;
  for (const char* run : {"a", "b"}) {
    ok = ok && cli("simulate --config " + cfg + " --out " + (tmp / run).string());
    ok = ok && cli("evaluate --run " + (tmp / run).string() + " --sections 0,0.5,1");
  }
  if (!ok) {
    detail = "CLI run failed";
    fs::remove_all(tmp);
    return false;
  }
  std::size_t compared = 0, identical = 0;
  std::string mismatches;
  for (const auto& entry : fs::directory_iterator(tmp / "a")) {
    const std::string name = entry.path().filename().string();
    if (name.find(".egrid") == std::string::npos &&
        name.find(".csv") == std::string::npos) {
      continue;
    }
    ++compared;
    if (slurp(tmp / "a" / name) == slurp(tmp / "b" / name)) {
      ++identical;
    } else {
      mismatches += " " + name;
    }
  }
  fs::remove_all(tmp);
  detail = fmt("%zu of %zu EGRID/CSV outputs byte-identical%s%s", identical,
               compared, mismatches.empty() ? "" : ", mismatched:",
               mismatches.c_str());
  return compared >= 5 && identical == compared;
}

} // namespace

int main() {
  std::printf("reefmap acceptance suite\n");
  run_criterion(1, criterion_moments);
  run_criterion(2, criterion_kalman);
  run_criterion(3, criterion_jacobians);
  run_criterion(4, criterion_sim1);
  run_criterion(5, criterion_sim2);
  run_criterion(6, criterion_sweep);
  run_criterion(7, criterion_performance);
  run_criterion(8, criterion_determinism);
  std::printf("%d of 8 criteria passed\n", 8 - g_failures);
  return g_failures;
}
