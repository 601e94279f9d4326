#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "reefmap/geometry.hpp"
#include "reefmap/io_formats.hpp"
#include "reefmap/range_sensor.hpp"

// Robot-centric probabilistic elevation grid. Heights are up-positive and
// stored relative to the map's reference elevation (the believed robot
// elevation), which motion updates re-reference. The grid itself stays
// NED-axis-aligned; motion updates shift it by whole cells through a
// circular buffer and inflate per-cell variances.
namespace reefmap::mapping {

struct MapCell {
  double height = 0.0;
  double height_variance = 0.0;
  double horizontal_variance = 0.0;
  bool observed = false;
  std::uint32_t last_update = 0;
};

// Floor applied to every stored variance so fusion weights stay finite.
inline constexpr double kVarianceFloor = 1e-9;

/// Height-measurement variance: ray variance projected onto the map height
/// axis plus the pose-rotation term,
///   sigma^2 = range_variance * (J_S . d)^2 + J_phi cov(phi) J_phi^T
/// with d the unit ray direction in the sensor frame and cov(phi) the
/// rotation block of the sensor pose covariance.
double measurement_variance(const Eigen::Vector3d& point_s,
                            const geometry::Pose& sensor_pose,
                            double range_variance);

/// Scalar Kalman fusion of a height measurement into a cell. Unobserved
/// cells initialize to the measurement. The degenerate 0/0 case (both
/// variances at the floor and heights differing) resolves to the
/// measurement; `degenerate` is set when provided.
MapCell update_cell(const MapCell& cell, double h_meas, double var_meas,
                    bool* degenerate = nullptr);

struct ScanStats {
  std::size_t points = 0;
  std::size_t integrated = 0;
  std::size_t skipped_outside = 0;
  std::size_t cells_touched = 0;
  std::size_t degenerate_fusions = 0;
};

struct MapConfig {
  double resolution = 0.02;
  double side = 5.0;
};

struct FusedMap {
  int cells_x = 0;
  int cells_y = 0;
  double resolution = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;
  std::vector<double> height;  // weighted-mean estimate
  std::vector<double> h_min;
  std::vector<double> h_max;
  std::vector<std::uint8_t> observed;

  std::size_t cell_count() const {
    return static_cast<std::size_t>(cells_x) * static_cast<std::size_t>(cells_y);
  }
};

class ElevationMap {
 public:
  explicit ElevationMap(const MapConfig& config);

  /// Re-centers the (cleared) map at a believed robot position and sets the
  /// height reference elevation.
  void reset(double center_x, double center_y, double ref_elevation);

  /// Integrates one scan. `sensor_pose` is the believed sensor pose in the
  /// map-aligned (NED) world frame, covariance ordered [t, rpy]. Points
  /// mapping outside the grid are counted and skipped.
  ScanStats integrate_scan(std::span<const sensor::RangePoint> points,
                           const geometry::Pose& sensor_pose);

  /// Applies a believed motion delta (translation in map axes, NED; the
  /// covariance is the per-step delta uncertainty). Shifts the grid by the
  /// accumulated whole-cell x-y translation, re-references heights by the
  /// z translation, and inflates variances.
  void motion_update(const geometry::Pose& delta);

  /// Weighted-mean fusion with confidence bounds over each cell's
  /// 2-sigma_xy neighborhood.
  FusedMap fuse() const;

  /// Grid export; fused layers are NaN unless `fused` is given.
  io::GridData snapshot(const FusedMap* fused = nullptr) const;

  int cells() const { return cells_; }
  double resolution() const { return config_.resolution; }
  double origin_x() const { return origin_x_; }
  double origin_y() const { return origin_y_; }
  double center_x() const { return origin_x_ + (cells_ - 1) * 0.5 * config_.resolution; }
  double center_y() const { return origin_y_ + (cells_ - 1) * 0.5 * config_.resolution; }
  double ref_elevation() const { return ref_elevation_; }
  std::uint32_t tick() const { return tick_; }

  MapCell cell_at(int ix, int iy) const;
  /// Logical cell index of a map-frame position, or false if outside.
  bool cell_index(double x, double y, int& ix, int& iy) const;
  std::size_t observed_count() const;

 private:
  std::size_t phys_index(int ix, int iy) const;
  void clear_cell(std::size_t idx);
  void shift(long kx, long ky);

  MapConfig config_;
  int cells_;
  std::vector<double> height_;
  std::vector<double> height_var_;
  std::vector<double> horiz_var_;
  std::vector<std::uint8_t> observed_;
  std::vector<std::uint32_t> last_update_;
  long start_x_ = 0;  // physical index of logical column 0
  long start_y_ = 0;
  double origin_x_ = 0.0;  // believed world x of logical cell (0,0) center
  double origin_y_ = 0.0;
  double frac_x_ = 0.0;  // sub-cell translation remainders
  double frac_y_ = 0.0;
  double ref_elevation_ = 0.0;
  std::uint32_t tick_ = 0;
};

} // namespace reefmap::mapping
