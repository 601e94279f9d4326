#include "reefmap/evaluate.hpp"

#include <cmath>
#include <stdexcept>

#include "reefmap/sim_world.hpp"

namespace reefmap::eval {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Estimate layer selection: prefer fused heights, else the raw layer.
const std::vector<float>& estimate_layer(const io::GridData& g) {
  for (float v : g.fused_height) {
    if (!std::isnan(v)) return g.fused_height;
  }
  return g.height;
}

void require_same_geometry(const io::GridData& a, const io::GridData& b) {
  if (!a.same_geometry(b)) {
    throw std::invalid_argument("grid geometries do not match");
  }
}

} // namespace

Region Region::corridor(double y_center, double halfwidth) {
  Region r;
  r.y0 = y_center - halfwidth;
  r.y1 = y_center + halfwidth;
  return r;
}

bool Region::contains(double x, double y) const {
  return x >= x0 && x <= x1 && y >= y0 && y <= y1;
}

ErrorMap error_map(const io::GridData& fused, const io::GridData& truth) {
  require_same_geometry(fused, truth);
  const auto& est = estimate_layer(fused);
  ErrorMap em;
  em.cells_x = fused.cells_x;
  em.cells_y = fused.cells_y;
  em.resolution = fused.resolution;
  em.origin_x = fused.origin_x;
  em.origin_y = fused.origin_y;
  const std::size_t n = fused.cell_count();
  em.abs_error.assign(n, kNan);
  em.mask.assign(n, 0);

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (fused.observed[i] == 0.0f || std::isnan(est[i]) ||
        std::isnan(truth.height[i])) {
      continue;
    }
    const double e = std::abs(static_cast<double>(est[i]) - truth.height[i]);
    em.abs_error[i] = e;
    em.mask[i] = 1;
    em.stats.max_error = std::max(em.stats.max_error, e);
    sum += e;
    sum_sq += e * e;
    ++em.stats.count;
  }
  if (em.stats.count > 0) {
    em.stats.mean_error = sum / static_cast<double>(em.stats.count);
    em.stats.rmse = std::sqrt(sum_sq / static_cast<double>(em.stats.count));
  }
  return em;
}

ErrorStats region_stats(const ErrorMap& em, const Region& region) {
  ErrorStats st;
  double sum = 0.0, sum_sq = 0.0;
  for (int j = 0; j < em.cells_y; ++j) {
    const double y = em.origin_y + j * em.resolution;
    for (int i = 0; i < em.cells_x; ++i) {
      const double x = em.origin_x + i * em.resolution;
      const std::size_t idx = static_cast<std::size_t>(j) * em.cells_x + i;
      if (!em.mask[idx] || !region.contains(x, y)) continue;
      const double e = em.abs_error[idx];
      st.max_error = std::max(st.max_error, e);
      sum += e;
      sum_sq += e * e;
      ++st.count;
    }
  }
  if (st.count > 0) {
    st.mean_error = sum / static_cast<double>(st.count);
    st.rmse = std::sqrt(sum_sq / static_cast<double>(st.count));
  }
  return st;
}

CrossSection cross_section(const io::GridData& fused, const io::GridData& truth,
                           char axis, double value) {
  require_same_geometry(fused, truth);
  if (axis != 'x' && axis != 'y') {
    throw std::invalid_argument("cross section axis must be 'x' or 'y'");
  }
  const auto& est = estimate_layer(fused);
  CrossSection cs;
  cs.axis = axis;
  cs.value = value;

  const bool along_x = axis == 'y';  // fixed y, samples along x
  const double fixed_origin = along_x ? fused.origin_y : fused.origin_x;
  const int fixed_cells = along_x ? fused.cells_y : fused.cells_x;
  const int row =
      static_cast<int>(std::floor((value - fixed_origin) / fused.resolution + 0.5));
  if (row < 0 || row >= fixed_cells) {
    throw std::out_of_range("cross section value outside the grid");
  }

  const int count = along_x ? fused.cells_x : fused.cells_y;
  for (int k = 0; k < count; ++k) {
    const std::size_t idx = along_x
        ? static_cast<std::size_t>(row) * fused.cells_x + k
        : static_cast<std::size_t>(k) * fused.cells_x + row;
    if (fused.observed[idx] == 0.0f || std::isnan(est[idx])) continue;
    CrossSection::Sample s;
    s.coord = (along_x ? fused.origin_x : fused.origin_y) + k * fused.resolution;
    s.h_est = est[idx];
    s.h_min = std::isnan(fused.h_min[idx]) ? est[idx] : fused.h_min[idx];
    s.h_max = std::isnan(fused.h_max[idx]) ? est[idx] : fused.h_max[idx];
    s.h_true = truth.height[idx];
    cs.samples.push_back(s);
  }
  return cs;
}

double bounds_coverage(const io::GridData& fused, const io::GridData& truth,
                       const std::optional<Region>& region) {
  require_same_geometry(fused, truth);
  std::size_t covered = 0, total = 0;
  for (int j = 0; j < fused.cells_y; ++j) {
    const double y = fused.origin_y + j * fused.resolution;
    for (int i = 0; i < fused.cells_x; ++i) {
      const double x = fused.origin_x + i * fused.resolution;
      const std::size_t idx = static_cast<std::size_t>(j) * fused.cells_x + i;
      if (fused.observed[idx] == 0.0f) continue;
      if (std::isnan(fused.h_min[idx]) || std::isnan(fused.h_max[idx]) ||
          std::isnan(truth.height[idx])) {
        continue;
      }
      if (region && !region->contains(x, y)) continue;
      ++total;
      const double t = truth.height[idx];
      if (t >= fused.h_min[idx] && t <= fused.h_max[idx]) ++covered;
    }
  }
  return total == 0 ? 0.0 : static_cast<double>(covered) / static_cast<double>(total);
}

std::vector<SweepRow> degradation_sweep(const io::ScenarioConfig& base,
                                        const std::vector<double>& epsilons) {
  for (double e : epsilons) {
    if (e < 0.0 || e > 1.0) {
      throw io::config_error("sweep epsilon out of [0, 1]");
    }
  }
  std::vector<SweepRow> rows;
  rows.reserve(epsilons.size());
  for (double e : epsilons) {
    io::ScenarioConfig cfg = base;
    cfg.degradation.epsilon = e;
    const sim::ScenarioResult res = sim::run_scenario(cfg);
    const io::GridData snap = res.map.snapshot(&res.fused);
    const ErrorMap em = error_map(snap, res.truth);
    SweepRow row;
    row.epsilon = e;
    row.mean_sigma2_z = res.mean_sigma2_z;
    row.rmse = em.stats.rmse;
    row.coverage = bounds_coverage(snap, res.truth);
    rows.push_back(row);
  }
  return rows;
}

void write_error_heatmap(const ErrorMap& em, const std::filesystem::path& path) {
  io::write_pgm16(path, em.abs_error, em.cells_x, em.cells_y, 0.0,
                  em.stats.max_error);
}

} // namespace reefmap::eval
