#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <span>
#include <vector>

// The DCNN-as-sensor abstraction: per-pixel discrete range-class
// distributions turned into sparse 3D range measurements with variances.
namespace reefmap::sensor {

// Discrete range classes. The defaults are four classes near / mid-field /
// far / free-space with representative ranges {2, 3, 4, 5} m, bin edges
// [0.45, 2) [2, 3) [3, 4) [4, inf), and a minimum detection distance of
// 0.45 m. The last class is free space and is never back-projected.
struct RangeClassScheme {
  std::vector<double> representative_ranges;
  std::vector<double> bin_edges;  // class_count + 1 entries, last may be +inf
  double min_detection = 0.45;

  static RangeClassScheme defaults();

  std::size_t class_count() const { return representative_ranges.size(); }
  std::size_t obstacle_class_count() const { return class_count() - 1; }

  /// Throws std::invalid_argument on non-increasing ranges, ranges at or
  /// below min_detection, or inconsistent edge count.
  void validate() const;
};

// Per-pixel class probabilities, stored as class-major float planes
// (plane c is row-major width*height).
class RangeClassImage {
 public:
  RangeClassImage(int width, int height, std::size_t classes);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t classes() const { return classes_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  float* plane(std::size_t c) { return data_.data() + c * pixel_count(); }
  const float* plane(std::size_t c) const { return data_.data() + c * pixel_count(); }
  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  float& at(std::size_t c, int u, int v) {
    return data_[c * pixel_count() + static_cast<std::size_t>(v) * width_ + u];
  }
  float at(std::size_t c, int u, int v) const {
    return data_[c * pixel_count() + static_cast<std::size_t>(v) * width_ + u];
  }

  std::vector<double> pdf_at(int u, int v) const;

  /// Throws std::invalid_argument if any pixel's probabilities are negative
  /// or do not sum to 1 within tol.
  void validate_normalized(double tol = 1e-6) const;

 private:
  int width_;
  int height_;
  std::size_t classes_;
  std::vector<float> data_;
};

struct CameraIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;

  /// Square pixels from a horizontal field of view; principal point at the
  /// image center.
  static CameraIntrinsics from_hfov(int width, int height, double hfov_deg);

  void validate() const;
};

struct PixelCoord {
  int u = 0;  // column
  int v = 0;  // row
};

struct RangePoint {
  Eigen::Vector3d point_s = Eigen::Vector3d::Zero();  // sensor frame, meters
  double range_mean = 0.0;
  double range_variance = 0.0;
  PixelCoord pixel;
};

struct Moments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of the discrete range distribution:
///   mean = sum r_i P(r_i),  variance = sum (r_i - mean)^2 P(r_i).
/// Throws std::invalid_argument on wrong length or normalization off by
/// more than 1e-6.
Moments pixel_range_moments(std::span<const double> pdf,
                            const RangeClassScheme& scheme);

/// diag(0, 0, variance): all sensor-model uncertainty lies along the
/// measurement ray (the ray frame's third axis).
Eigen::Matrix3d sensor_covariance(double range_variance);

struct BoundaryPixel {
  PixelCoord pixel;
  std::size_t class_index;
};

/// Top pixels of vertical obstacle-class runs. Columns are scanned from the
/// top row downward over per-pixel argmax classes (ties to the lowest
/// index); each maximal run of an obstacle class with length >= min_run
/// emits its first pixel. Free-space runs emit nothing.
std::vector<BoundaryPixel> extract_boundary_pixels(const RangeClassImage& image,
                                                   const RangeClassScheme& scheme,
                                                   int min_run = 2);

/// Sensor-frame measurement point for a boundary pixel: the pixel ray
/// scaled to the class representative range (Euclidean distance along the
/// ray), with range moments from the pixel's pdf attached.
/// Throws std::out_of_range for pixels outside the image.
RangePoint backproject(PixelCoord pixel, std::size_t class_index,
                       const CameraIntrinsics& intr,
                       const RangeClassScheme& scheme,
                       std::span<const double> pdf);

/// extract_boundary_pixels + backproject, in deterministic column-major
/// (left-to-right, top-to-bottom) order.
std::vector<RangePoint> sense(const RangeClassImage& image,
                              const CameraIntrinsics& intr,
                              const RangeClassScheme& scheme);

} // namespace reefmap::sensor
