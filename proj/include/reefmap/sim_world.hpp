#pragma once

#include <cstdint>
#include <vector>

#include "reefmap/config.hpp"
#include "reefmap/elevation_map.hpp"
#include "reefmap/geometry.hpp"
#include "reefmap/io_formats.hpp"
#include "reefmap/range_sensor.hpp"

// Deterministic synthetic underwater world: analytic heightfields, transect
// trajectories, and a ray-cast camera whose binned output stands in for the
// learned range classifier.
namespace reefmap::sim {

// Analytic ground-truth terrain, up-positive elevation h(x, y).
class Heightfield {
 public:
  static Heightfield flat(double level);
  /// Vertical step at x = wall_x (a declared cliff feature).
  static Heightfield wall(double wall_x, double height, double base = 0.0);
  /// Two smooth-edged plateaus over [a_x0,a_x1] and [b_x0,b_x1] x [y0,y1],
  /// separated by a crevice whose floor sits at gap_depth.
  static Heightfield plateau_gap(double height, double a_x0, double a_x1,
                                 double b_x0, double b_x1, double y0, double y1,
                                 double edge_width, double gap_depth = 0.0);
  /// base + amplitude * sin(2 pi x / wx) * cos(2 pi y / wy).
  static Heightfield undulating(double amplitude, double wavelength_x,
                                double wavelength_y, double base);
  static Heightfield from_config(const io::WorldConfig& cfg);

  double operator()(double x, double y) const;
  /// Lipschitz bound on the terrain slope; +inf for cliff features.
  double slope_bound() const;

 private:
  enum class Kind { flat, wall, plateau_gap, undulating };
  Kind kind_ = Kind::flat;
  double p_[9] = {0};
};

struct Trajectory {
  struct Step {
    double t = 0.0;
    geometry::Pose pose;  // base pose, NED world
  };
  std::vector<Step> steps;
};

/// Straight transect along +x at constant commanded elevation, 10 Hz.
Trajectory make_transect(const io::TrajectoryConfig& cfg);

/// Static base-to-camera extrinsic: optical axis forward, tilted down.
/// Camera axes: x right (image columns), y down (image rows), z optical.
geometry::Pose camera_extrinsic(double tilt_down_deg);

struct DegradationModel {
  double epsilon = 0.0;
  int smear = 0;
  std::uint64_t seed = 0;
};

struct RangeImage {
  int width = 0;
  int height = 0;
  std::vector<float> range;  // Euclidean hit distance, +inf = no hit
};

/// Per-pixel ray cast against the heightfield. The default marcher bounds
/// its steps with the terrain's slope bound and refines hits by bisection
/// to 1 mm; fields with unbounded slope fall back to fixed 1 cm stepping.
RangeImage raycast(const Heightfield& hf, const geometry::Pose& sensor_pose,
                   const sensor::CameraIntrinsics& intr, double max_range = 10.0);

/// Reference marcher: fixed steps (map resolution / 2) plus the same 1 mm
/// bisection. Slower; used for equivalence checks.
RangeImage raycast_fixed_step(const Heightfield& hf,
                              const geometry::Pose& sensor_pose,
                              const sensor::CameraIntrinsics& intr,
                              double max_range = 10.0, double step = 0.01);

/// Ranges binned to one-hot class pdfs (sub-minimum ranges clamp to the
/// nearest class, misses to free space), blended toward uniform by epsilon,
/// then optionally box-smeared over a (2k+1)^2 window.
sensor::RangeClassImage classify(const RangeImage& ranges,
                                 const sensor::RangeClassScheme& scheme,
                                 const DegradationModel& degradation);

struct StepLog {
  int step = 0;
  double t = 0.0;
  double x = 0.0;  // believed base position
  double y = 0.0;
  std::size_t points = 0;
  std::size_t integrated = 0;
  std::size_t skipped_outside = 0;
  std::size_t cells_touched = 0;
  double mean_sigma2_z = 0.0;  // image-wide mean class variance
};

struct ScenarioResult {
  mapping::ElevationMap map;
  mapping::FusedMap fused;
  io::GridData truth;  // heightfield sampled on the final cells,
                       // re-referenced to the first pose elevation
  std::vector<StepLog> logs;
  double mean_sigma2_z = 0.0;  // average of the per-frame means
};

/// Full pipeline: per step raycast -> classify -> sense -> motion update
/// (believed deltas carry the configured noise covariance; noise is sampled
/// from the scenario seed when enabled) -> integrate; final fusion and
/// ground-truth sampling.
ScenarioResult run_scenario(const io::ScenarioConfig& cfg);

/// Same pipeline over an explicit trajectory (empty trajectories yield an
/// empty map and no logs).
ScenarioResult run_scenario_with_trajectory(const io::ScenarioConfig& cfg,
                                            const Trajectory& trajectory);

} // namespace reefmap::sim
