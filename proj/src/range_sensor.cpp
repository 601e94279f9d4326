#include "reefmap/range_sensor.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "reefmap/kernels.hpp"

namespace reefmap::sensor {

RangeClassScheme RangeClassScheme::defaults() {
  RangeClassScheme s;
  s.representative_ranges = {2.0, 3.0, 4.0, 5.0};
  s.bin_edges = {0.45, 2.0, 3.0, 4.0, std::numeric_limits<double>::infinity()};
  s.min_detection = 0.45;
  return s;
}

void RangeClassScheme::validate() const {
  if (representative_ranges.size() < 2) {
    throw std::invalid_argument("scheme needs at least two range classes");
  }
  if (bin_edges.size() != representative_ranges.size() + 1) {
    throw std::invalid_argument("scheme bin_edges must have class_count + 1 entries");
  }
  for (std::size_t i = 0; i < representative_ranges.size(); ++i) {
    if (representative_ranges[i] <= min_detection) {
      throw std::invalid_argument(
          "scheme representative_ranges must exceed min_detection");
    }
    if (i > 0 && representative_ranges[i] <= representative_ranges[i - 1]) {
      throw std::invalid_argument(
          "scheme representative_ranges must be strictly increasing");
    }
  }
  for (std::size_t i = 1; i < bin_edges.size(); ++i) {
    if (!(bin_edges[i] > bin_edges[i - 1])) {
      throw std::invalid_argument("scheme bin_edges must be strictly increasing");
    }
  }
}

RangeClassImage::RangeClassImage(int width, int height, std::size_t classes)
    : width_(width), height_(height), classes_(classes) {
  if (width <= 0 || height <= 0 || classes == 0) {
    throw std::invalid_argument("range class image dimensions must be positive");
  }
  data_.assign(pixel_count() * classes_, 0.0f);
}

std::vector<double> RangeClassImage::pdf_at(int u, int v) const {
  std::vector<double> pdf(classes_);
  for (std::size_t c = 0; c < classes_; ++c) {
    pdf[c] = static_cast<double>(at(c, u, v));
  }
  return pdf;
}

void RangeClassImage::validate_normalized(double tol) const {
  const std::size_t n = pixel_count();
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < classes_; ++c) {
      const float p = data_[c * n + i];
      if (!(p >= 0.0f)) {
        throw std::invalid_argument(
            "range class image has negative or non-finite probability");
      }
      sum += p;
    }
    if (!(std::abs(sum - 1.0) <= tol)) {
      throw std::invalid_argument("range class image pixel is not normalized");
    }
  }
}

CameraIntrinsics CameraIntrinsics::from_hfov(int width, int height, double hfov_deg) {
  CameraIntrinsics intr;
  intr.width = width;
  intr.height = height;
  const double half = hfov_deg * std::numbers::pi / 360.0;
  intr.fx = (width / 2.0) / std::tan(half);
  intr.fy = intr.fx;
  intr.cx = width / 2.0;
  intr.cy = height / 2.0;
  intr.validate();
  return intr;
}

void CameraIntrinsics::validate() const {
  if (width <= 0 || height <= 0) {
    throw std::invalid_argument("camera image dimensions must be positive");
  }
  if (!(fx > 0.0) || !(fy > 0.0)) {
    throw std::invalid_argument("camera focal lengths must be positive");
  }
  if (cx < 0.0 || cx > width || cy < 0.0 || cy > height) {
    throw std::invalid_argument("camera principal point outside the image");
  }
}

Moments pixel_range_moments(std::span<const double> pdf,
                            const RangeClassScheme& scheme) {
  if (pdf.size() != scheme.class_count()) {
    throw std::invalid_argument("pdf length does not match scheme class count");
  }
  double sum = 0.0;
  for (double p : pdf) {
    if (!(p >= -1e-9)) {
      throw std::invalid_argument("pdf has negative or non-finite probability");
    }
    sum += p;
  }
  if (!(std::abs(sum - 1.0) <= 1e-6)) {
    throw std::invalid_argument("pdf is not normalized");
  }
  Moments m;
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    m.mean += scheme.representative_ranges[i] * pdf[i];
  }
  for (std::size_t i = 0; i < pdf.size(); ++i) {
    const double d = scheme.representative_ranges[i] - m.mean;
    m.variance += d * d * pdf[i];
  }
  return m;
}

Eigen::Matrix3d sensor_covariance(double range_variance) {
  Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
  cov(2, 2) = range_variance;
  return cov;
}

std::vector<BoundaryPixel> extract_boundary_pixels(const RangeClassImage& image,
                                                   const RangeClassScheme& scheme,
                                                   int min_run) {
  if (image.classes() != scheme.class_count()) {
    throw std::invalid_argument("image class count does not match scheme");
  }
  const std::size_t n = image.pixel_count();
  std::vector<std::uint8_t> labels(n);
  kernels::argmax_classes(image.data().data(), n, image.classes(), labels.data());

  const auto free_class = static_cast<std::uint8_t>(scheme.class_count() - 1);
  const int w = image.width();
  const int h = image.height();
  std::vector<BoundaryPixel> out;
  for (int u = 0; u < w; ++u) {
    int v = 0;
    while (v < h) {
      const std::uint8_t cls = labels[static_cast<std::size_t>(v) * w + u];
      int run = 1;
      while (v + run < h &&
             labels[static_cast<std::size_t>(v + run) * w + u] == cls) {
        ++run;
      }
      if (cls != free_class && run >= min_run) {
        out.push_back({{u, v}, cls});
      }
      v += run;
    }
  }
  return out;
}

RangePoint backproject(PixelCoord pixel, std::size_t class_index,
                       const CameraIntrinsics& intr,
                       const RangeClassScheme& scheme,
                       std::span<const double> pdf) {
  if (pixel.u < 0 || pixel.u >= intr.width || pixel.v < 0 || pixel.v >= intr.height) {
    throw std::out_of_range("backproject pixel outside image bounds");
  }
  if (class_index >= scheme.obstacle_class_count()) {
    throw std::invalid_argument("backproject requires an obstacle class");
  }
  Eigen::Vector3d dir((pixel.u - intr.cx) / intr.fx,
                      (pixel.v - intr.cy) / intr.fy, 1.0);
  dir.normalize();
  const Moments m = pixel_range_moments(pdf, scheme);
  RangePoint pt;
  pt.point_s = scheme.representative_ranges[class_index] * dir;
  pt.range_mean = m.mean;
  pt.range_variance = m.variance;
  pt.pixel = pixel;
  return pt;
}

std::vector<RangePoint> sense(const RangeClassImage& image,
                              const CameraIntrinsics& intr,
                              const RangeClassScheme& scheme) {
  const auto boundaries = extract_boundary_pixels(image, scheme);
  std::vector<RangePoint> points;
  points.reserve(boundaries.size());
  for (const auto& b : boundaries) {
    points.push_back(backproject(b.pixel, b.class_index, intr, scheme,
                                 image.pdf_at(b.pixel.u, b.pixel.v)));
  }
  return points;
}

} // namespace reefmap::sensor
