#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "reefmap/config.hpp"
#include "reefmap/io_formats.hpp"

// Quantitative comparison of predicted maps against ground truth.
// Statistics cover observed cells only; unobserved cells are never imputed.
namespace reefmap::eval {

struct ErrorStats {
  double max_error = 0.0;
  double mean_error = 0.0;
  double rmse = 0.0;
  std::size_t count = 0;
};

struct ErrorMap {
  int cells_x = 0;
  int cells_y = 0;
  double resolution = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> abs_error;  // NaN where unobserved
  std::vector<std::uint8_t> mask;
  ErrorStats stats;
};

// Optional rectangular restriction in world coordinates (inclusive).
struct Region {
  double x0 = -std::numeric_limits<double>::infinity();
  double x1 = std::numeric_limits<double>::infinity();
  double y0 = -std::numeric_limits<double>::infinity();
  double y1 = std::numeric_limits<double>::infinity();

  /// The |y - center| <= halfwidth transect corridor.
  static Region corridor(double y_center, double halfwidth);
  bool contains(double x, double y) const;
};

/// Per-cell |fused - truth| over cells observed in the fused grid. Both
/// grids must share geometry (throws std::invalid_argument otherwise).
/// The fused estimate layer is `fused_height`, falling back to `height`
/// when no fused layer is present.
ErrorMap error_map(const io::GridData& fused, const io::GridData& truth);

ErrorStats region_stats(const ErrorMap& em, const Region& region);

struct CrossSection {
  char axis = 'y';     // fixed axis; samples run along the other one
  double value = 0.0;  // requested coordinate
  struct Sample {
    double coord = 0.0;
    double h_est = 0.0;
    double h_min = 0.0;
    double h_max = 0.0;
    double h_true = 0.0;
  };
  std::vector<Sample> samples;  // strictly increasing coord, observed cells
};

/// Nearest-row extraction at a fixed y (axis='y') or fixed x (axis='x').
/// Throws std::out_of_range when the value lies outside the grid.
CrossSection cross_section(const io::GridData& fused, const io::GridData& truth,
                           char axis, double value);

/// Fraction of observed cells with h_true inside [h_min, h_max].
double bounds_coverage(const io::GridData& fused, const io::GridData& truth,
                       const std::optional<Region>& region = std::nullopt);

struct SweepRow {
  double epsilon = 0.0;
  double mean_sigma2_z = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;
};

/// One run_scenario per epsilon with the base config's seed; rows follow
/// the input order. Epsilons must lie in [0, 1].
std::vector<SweepRow> degradation_sweep(const io::ScenarioConfig& base,
                                        const std::vector<double>& epsilons);

/// error_map.pgm + sidecar; grays scale linearly over [0, max error].
void write_error_heatmap(const ErrorMap& em, const std::filesystem::path& path);

} // namespace reefmap::eval
