#include "reefmap/elevation_map.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "reefmap/kernels.hpp"

namespace reefmap::mapping {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Gather radii are robot-local by construction; anything larger than this
// many cells indicates a runaway variance, not a useful neighborhood.
constexpr int kMaxFuseRadiusCells = 64;

long wrap(long v, long n) {
  v %= n;
  return v < 0 ? v + n : v;
}

} // namespace

double measurement_variance(const Eigen::Vector3d& point_s,
                            const geometry::Pose& sensor_pose,
                            double range_variance) {
  const geometry::RowVec3 j_s = geometry::jacobian_range(point_s, sensor_pose);
  double ray_term = 0.0;
  const double norm = point_s.norm();
  if (norm > 1e-12) {
    const double proj = j_s.dot(point_s / norm);
    ray_term = range_variance * proj * proj;
  }
  const geometry::RowVec3 j_phi = geometry::jacobian_rotation(point_s, sensor_pose);
  const Eigen::Matrix3d cov_phi = sensor_pose.covariance.block<3, 3>(3, 3);
  const double rot_term = j_phi * cov_phi * j_phi.transpose();
  return std::max(0.0, ray_term + rot_term);
}

MapCell update_cell(const MapCell& cell, double h_meas, double var_meas,
                    bool* degenerate) {
  if (degenerate) *degenerate = false;
  var_meas = std::max(var_meas, 0.0);
  MapCell out = cell;
  out.observed = true;
  if (!cell.observed) {
    out.height = h_meas;
    out.height_variance = std::max(var_meas, kVarianceFloor);
    return out;
  }
  const double prior_var = cell.height_variance;
  if (var_meas <= 0.0 && prior_var <= kVarianceFloor) {
    // 0/0 fusion: both sides claim certainty; take the measurement.
    if (degenerate && h_meas != cell.height) *degenerate = true;
    out.height = h_meas;
    out.height_variance = kVarianceFloor;
    return out;
  }
  const double denom = var_meas + prior_var;
  out.height = (var_meas * cell.height + prior_var * h_meas) / denom;
  out.height_variance = std::max((prior_var * var_meas) / denom, kVarianceFloor);
  return out;
}

ElevationMap::ElevationMap(const MapConfig& config) : config_(config) {
  if (!(config.resolution > 0.0) || !(config.side > 0.0)) {
    throw std::invalid_argument("map resolution and side must be positive");
  }
  cells_ = static_cast<int>(std::lround(config.side / config.resolution));
  if (cells_ <= 0 || cells_ > 4096) {
    throw std::invalid_argument("map cell count out of range");
  }
  reset(0.0, 0.0, 0.0);
}

void ElevationMap::reset(double center_x, double center_y, double ref_elevation) {
  const std::size_t n = static_cast<std::size_t>(cells_) * cells_;
  height_.assign(n, kNan);
  height_var_.assign(n, kNan);
  horiz_var_.assign(n, kNan);
  observed_.assign(n, 0);
  last_update_.assign(n, 0);
  start_x_ = start_y_ = 0;
  frac_x_ = frac_y_ = 0.0;
  origin_x_ = center_x - (cells_ - 1) * 0.5 * config_.resolution;
  origin_y_ = center_y - (cells_ - 1) * 0.5 * config_.resolution;
  ref_elevation_ = ref_elevation;
  tick_ = 0;
}

std::size_t ElevationMap::phys_index(int ix, int iy) const {
  const long px = wrap(start_x_ + ix, cells_);
  const long py = wrap(start_y_ + iy, cells_);
  return static_cast<std::size_t>(py) * cells_ + static_cast<std::size_t>(px);
}

void ElevationMap::clear_cell(std::size_t idx) {
  height_[idx] = kNan;
  height_var_[idx] = kNan;
  horiz_var_[idx] = kNan;
  observed_[idx] = 0;
  last_update_[idx] = 0;
}

bool ElevationMap::cell_index(double x, double y, int& ix, int& iy) const {
  const double fx = (x - origin_x_) / config_.resolution;
  const double fy = (y - origin_y_) / config_.resolution;
  ix = static_cast<int>(std::floor(fx + 0.5));
  iy = static_cast<int>(std::floor(fy + 0.5));
  return ix >= 0 && ix < cells_ && iy >= 0 && iy < cells_;
}

MapCell ElevationMap::cell_at(int ix, int iy) const {
  if (ix < 0 || ix >= cells_ || iy < 0 || iy >= cells_) {
    throw std::out_of_range("map cell index out of range");
  }
  const std::size_t idx = phys_index(ix, iy);
  MapCell c;
  c.observed = observed_[idx] != 0;
  if (c.observed) {
    c.height = height_[idx];
    c.height_variance = height_var_[idx];
    c.horizontal_variance = horiz_var_[idx];
  }
  c.last_update = last_update_[idx];
  return c;
}

std::size_t ElevationMap::observed_count() const {
  std::size_t n = 0;
  for (auto o : observed_) n += o;
  return n;
}

ScanStats ElevationMap::integrate_scan(std::span<const sensor::RangePoint> points,
                                       const geometry::Pose& sensor_pose) {
  ++tick_;
  ScanStats stats;
  stats.points = points.size();

  const Eigen::Matrix3d rot = sensor_pose.rotation.matrix();
  const double txy_var = 0.5 * (sensor_pose.covariance(0, 0) +
                                sensor_pose.covariance(1, 1));

  for (const auto& pt : points) {
    const Eigen::Vector3d p_w = rot * pt.point_s + sensor_pose.translation;
    int ix = 0, iy = 0;
    if (!cell_index(p_w.x(), p_w.y(), ix, iy)) {
      ++stats.skipped_outside;
      continue;
    }
    const double h_meas = -p_w.z() - ref_elevation_;
    const double var_meas =
        measurement_variance(pt.point_s, sensor_pose, pt.range_variance);

    const std::size_t idx = phys_index(ix, iy);
    MapCell cell;
    cell.observed = observed_[idx] != 0;
    if (cell.observed) {
      cell.height = height_[idx];
      cell.height_variance = height_var_[idx];
      cell.horizontal_variance = horiz_var_[idx];
    }
    bool degenerate = false;
    const MapCell updated = update_cell(cell, h_meas, var_meas, &degenerate);
    if (degenerate) ++stats.degenerate_fusions;

    double lateral = 0.0;
    const double norm = pt.point_s.norm();
    if (norm > 1e-12) {
      const Eigen::Vector3d d_w = rot * (pt.point_s / norm);
      lateral = 0.5 * pt.range_variance * (d_w.x() * d_w.x() + d_w.y() * d_w.y());
    }

    if (last_update_[idx] != tick_) ++stats.cells_touched;
    height_[idx] = updated.height;
    height_var_[idx] = updated.height_variance;
    horiz_var_[idx] = std::max(txy_var + lateral, kVarianceFloor);
    observed_[idx] = 1;
    last_update_[idx] = tick_;
    ++stats.integrated;
  }
  return stats;
}

void ElevationMap::shift(long kx, long ky) {
  if (kx == 0 && ky == 0) return;
  if (std::labs(kx) >= cells_ || std::labs(ky) >= cells_) {
    const double cx = center_x() + kx * config_.resolution;
    const double cy = center_y() + ky * config_.resolution;
    const double keep_frac_x = frac_x_, keep_frac_y = frac_y_;
    const double ref = ref_elevation_;
    const auto keep_tick = tick_;
    reset(cx, cy, ref);
    frac_x_ = keep_frac_x;
    frac_y_ = keep_frac_y;
    tick_ = keep_tick;
    return;
  }
  // Relabel through the circular buffer, then clear the cells that entered.
  start_x_ = wrap(start_x_ + kx, cells_);
  origin_x_ += kx * config_.resolution;
  if (kx > 0) {
    for (int j = 0; j < cells_; ++j)
      for (long i = cells_ - kx; i < cells_; ++i)
        clear_cell(phys_index(static_cast<int>(i), j));
  } else if (kx < 0) {
    for (int j = 0; j < cells_; ++j)
      for (long i = 0; i < -kx; ++i)
        clear_cell(phys_index(static_cast<int>(i), j));
  }
  start_y_ = wrap(start_y_ + ky, cells_);
  origin_y_ += ky * config_.resolution;
  if (ky > 0) {
    for (long j = cells_ - ky; j < cells_; ++j)
      for (int i = 0; i < cells_; ++i)
        clear_cell(phys_index(i, static_cast<int>(j)));
  } else if (ky < 0) {
    for (long j = 0; j < -ky; ++j)
      for (int i = 0; i < cells_; ++i)
        clear_cell(phys_index(i, static_cast<int>(j)));
  }
}

void ElevationMap::motion_update(const geometry::Pose& delta) {
  const double res = config_.resolution;
  frac_x_ += delta.translation.x();
  frac_y_ += delta.translation.y();
  const long kx = std::lround(frac_x_ / res);
  const long ky = std::lround(frac_y_ / res);
  frac_x_ -= kx * res;
  frac_y_ -= ky * res;
  shift(kx, ky);

  const double dz_ned = delta.translation.z();
  ref_elevation_ -= dz_ned;

  const auto& cov = delta.covariance;
  const double zvar = cov(2, 2);
  const double txy_var = 0.5 * (cov(0, 0) + cov(1, 1));
  // Lever-arm inflation: d(height)/d(roll,pitch,yaw) at identity for a cell
  // at (x, y) relative to the map center is (-y, x, 0), so the quadratic
  // form contributes a*y^2 + b*x^2 + c*x*y per cell.
  const double a = cov(3, 3);
  const double b = cov(4, 4);
  const double c = -2.0 * cov(3, 4);

  if (dz_ned == 0.0 && zvar == 0.0 && txy_var == 0.0 && a == 0.0 && b == 0.0 &&
      c == 0.0) {
    return;
  }

  const double half = (cells_ - 1) * 0.5;
  const long sx = start_x_;
  for (int j = 0; j < cells_; ++j) {
    const double y_rel = (j - half) * res;
    const long py = wrap(start_y_ + j, cells_);
    double* hrow = height_.data() + static_cast<std::size_t>(py) * cells_;
    double* vrow = height_var_.data() + static_cast<std::size_t>(py) * cells_;
    double* xrow = horiz_var_.data() + static_cast<std::size_t>(py) * cells_;
    // Logical row j occupies up to two contiguous physical segments.
    const std::size_t n_first = static_cast<std::size_t>(cells_ - sx);
    kernels::motion_inflate(hrow + sx, vrow + sx, xrow + sx, n_first, dz_ned,
                            zvar, txy_var, a, b, c, (0 - half) * res, res, y_rel);
    if (sx > 0) {
      kernels::motion_inflate(hrow, vrow, xrow, static_cast<std::size_t>(sx),
                              dz_ned, zvar, txy_var, a, b, c,
                              (static_cast<double>(cells_ - sx) - half) * res,
                              res, y_rel);
    }
  }
}

FusedMap ElevationMap::fuse() const {
  FusedMap f;
  f.cells_x = f.cells_y = cells_;
  f.resolution = config_.resolution;
  f.origin_x = origin_x_;
  f.origin_y = origin_y_;
  const std::size_t n = static_cast<std::size_t>(cells_) * cells_;
  f.height.assign(n, kNan);
  f.h_min.assign(n, kNan);
  f.h_max.assign(n, kNan);
  f.observed.assign(n, 0);

  const double res = config_.resolution;
  for (int j = 0; j < cells_; ++j) {
    for (int i = 0; i < cells_; ++i) {
      const std::size_t idx = phys_index(i, j);
      if (!observed_[idx]) continue;
      const double radius = 2.0 * std::sqrt(horiz_var_[idx]);
      const int rc = std::min(static_cast<int>(std::floor(radius / res)),
                              kMaxFuseRadiusCells);
      const double radius_sq = radius * radius;
      double wsum = 0.0, hsum = 0.0;
      double lo = std::numeric_limits<double>::infinity();
      double hi = -std::numeric_limits<double>::infinity();
      for (int dj = -rc; dj <= rc; ++dj) {
        const int jj = j + dj;
        if (jj < 0 || jj >= cells_) continue;
        for (int di = -rc; di <= rc; ++di) {
          const int ii = i + di;
          if (ii < 0 || ii >= cells_) continue;
          const double dist_sq = (static_cast<double>(di) * di +
                                  static_cast<double>(dj) * dj) * res * res;
          if (dist_sq > radius_sq) continue;
          const std::size_t nidx = phys_index(ii, jj);
          if (!observed_[nidx]) continue;
          const double var = std::max(height_var_[nidx], kVarianceFloor);
          const double w = 1.0 / var;
          const double h = height_[nidx];
          const double sigma2 = 2.0 * std::sqrt(var);
          wsum += w;
          hsum += w * h;
          lo = std::min(lo, h - sigma2);
          hi = std::max(hi, h + sigma2);
        }
      }
      const std::size_t out = static_cast<std::size_t>(j) * cells_ + i;
      f.height[out] = hsum / wsum;
      f.h_min[out] = lo;
      f.h_max[out] = hi;
      f.observed[out] = 1;
    }
  }
  return f;
}

io::GridData ElevationMap::snapshot(const FusedMap* fused) const {
  if (fused && (fused->cells_x != cells_ || fused->origin_x != origin_x_ ||
                fused->origin_y != origin_y_)) {
    throw std::invalid_argument("fused map geometry does not match the raw map");
  }
  io::GridData g = io::GridData::allocate(cells_, cells_, config_.resolution,
                                          origin_x_, origin_y_);
  for (int j = 0; j < cells_; ++j) {
    for (int i = 0; i < cells_; ++i) {
      const std::size_t src = phys_index(i, j);
      const std::size_t dst = static_cast<std::size_t>(j) * cells_ + i;
      if (observed_[src]) {
        g.height[dst] = static_cast<float>(height_[src]);
        g.height_variance[dst] = static_cast<float>(height_var_[src]);
        g.horizontal_variance[dst] = static_cast<float>(horiz_var_[src]);
        g.observed[dst] = 1.0f;
      }
      if (fused && fused->observed[dst]) {
        g.fused_height[dst] = static_cast<float>(fused->height[dst]);
        g.h_min[dst] = static_cast<float>(fused->h_min[dst]);
        g.h_max[dst] = static_cast<float>(fused->h_max[dst]);
      }
    }
  }
  return g;
}

} // namespace reefmap::mapping
