#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "reefmap/range_sensor.hpp"

namespace reefmap::io {

class config_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// [world]
struct WorldConfig {
  std::string terrain = "flat";  // flat | wall | plateau_gap | undulating
  double max_range = 10.0;

  double level = 0.0;  // flat

  double wall_x = 2.5;  // wall
  double wall_height = 2.0;
  double wall_base = 0.0;

  double plateau_height = 2.0;  // plateau_gap
  double plateau_a_x0 = 3.6;
  double plateau_a_x1 = 5.8;
  double plateau_b_x0 = 6.5;
  double plateau_b_x1 = 9.2;
  double plateau_y0 = 0.9;
  double plateau_y1 = 3.2;
  double edge_width = 0.25;
  double gap_depth = 0.0;  // crevice floor elevation between the plateaus

  double amplitude = 0.3;  // undulating
  double wavelength_x = 3.0;
  double wavelength_y = 4.0;
  double base = -0.1;
};

// [trajectory] straight transect at constant commanded elevation.
struct TrajectoryConfig {
  double x_start = 0.0;
  double x_end = 12.0;
  double y = 0.0;
  double elevation = 1.0;  // up-positive
  double step = 0.1;       // meters between frames
};

// [camera]
struct CameraConfig {
  int width = 512;
  int height = 384;
  double hfov_deg = 80.0;
  double tilt_down_deg = 15.0;  // optical axis below the horizon
};

// [scheme]
struct SchemeConfig {
  double min_detection = 0.45;
  std::vector<double> representative_ranges = {2.0, 3.0, 4.0, 5.0};

  /// Bin edges are min_detection followed by the representative ranges of
  /// all but the last (free-space) class, then +inf.
  sensor::RangeClassScheme build() const;
};

// [degradation]
struct DegradationConfig {
  double epsilon = 0.0;
  int smear = 0;  // box kernel half-width, pixels
};

// [map]
struct MapGridConfig {
  double resolution = 0.02;
  double side = 5.0;
};

// [noise] per-step pose delta noise; sampled when `sample` is set, always
// reflected in the believed step covariance.
struct NoiseConfig {
  double translation_sigma = 0.01;  // m per step, each axis
  double rotation_sigma_deg = 0.2;  // deg per step, each axis
  bool sample = true;
};

struct ScenarioConfig {
  WorldConfig world;
  TrajectoryConfig trajectory;
  CameraConfig camera;
  SchemeConfig scheme;
  DegradationConfig degradation;
  MapGridConfig map;
  NoiseConfig noise;
  std::uint64_t seed = 1;  // [seed] value

  /// Cross-field validation; throws config_error.
  void validate() const;
};

/// Strict parse: unknown sections or keys are errors, messages carry line
/// numbers. An empty file yields all defaults.
ScenarioConfig parse_config(const std::string& text, const std::string& name);
ScenarioConfig read_config(const std::filesystem::path& path);

} // namespace reefmap::io
