#include "reefmap/sim_world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <thread>

#include "reefmap/kernels.hpp"

namespace reefmap::sim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBisectTol = 1e-3;  // 1 mm hit refinement

double smoothstep(double u) {
  if (u <= 0.0) return 0.0;
  if (u >= 1.0) return 1.0;
  return u * u * (3.0 - 2.0 * u);
}

// Smooth indicator of [t0, t1] with edge width w.
double box_window(double t, double t0, double t1, double w) {
  return smoothstep((t - t0) / w) * smoothstep((t1 - t) / w);
}

// Deterministic standard normals (Box-Muller over mt19937_64), independent
// of the standard library's distribution implementations.
class GaussianSampler {
 public:
  explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

  double next() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = (static_cast<double>(rng_() >> 11) + 1.0) * 0x1p-53;
    const double u2 = static_cast<double>(rng_() >> 11) * 0x1p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 rng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

} // namespace

Heightfield Heightfield::flat(double level) {
  Heightfield hf;
  hf.kind_ = Kind::flat;
  hf.p_[0] = level;
  return hf;
}

Heightfield Heightfield::wall(double wall_x, double height, double base) {
  Heightfield hf;
  hf.kind_ = Kind::wall;
  hf.p_[0] = wall_x;
  hf.p_[1] = height;
  hf.p_[2] = base;
  return hf;
}

Heightfield Heightfield::plateau_gap(double height, double a_x0, double a_x1,
                                     double b_x0, double b_x1, double y0,
                                     double y1, double edge_width,
                                     double gap_depth) {
  Heightfield hf;
  hf.kind_ = Kind::plateau_gap;
  hf.p_[0] = height;
  hf.p_[1] = a_x0;
  hf.p_[2] = a_x1;
  hf.p_[3] = b_x0;
  hf.p_[4] = b_x1;
  hf.p_[5] = y0;
  hf.p_[6] = y1;
  hf.p_[7] = edge_width;
  hf.p_[8] = gap_depth;
  return hf;
}

Heightfield Heightfield::undulating(double amplitude, double wavelength_x,
                                    double wavelength_y, double base) {
  Heightfield hf;
  hf.kind_ = Kind::undulating;
  hf.p_[0] = amplitude;
  hf.p_[1] = wavelength_x;
  hf.p_[2] = wavelength_y;
  hf.p_[3] = base;
  return hf;
}

Heightfield Heightfield::from_config(const io::WorldConfig& cfg) {
  if (cfg.terrain == "flat") return flat(cfg.level);
  if (cfg.terrain == "wall") return wall(cfg.wall_x, cfg.wall_height, cfg.wall_base);
  if (cfg.terrain == "plateau_gap") {
    return plateau_gap(cfg.plateau_height, cfg.plateau_a_x0, cfg.plateau_a_x1,
                       cfg.plateau_b_x0, cfg.plateau_b_x1, cfg.plateau_y0,
                       cfg.plateau_y1, cfg.edge_width, cfg.gap_depth);
  }
  if (cfg.terrain == "undulating") {
    return undulating(cfg.amplitude, cfg.wavelength_x, cfg.wavelength_y, cfg.base);
  }
  throw io::config_error("unknown terrain '" + cfg.terrain + "'");
}

double Heightfield::operator()(double x, double y) const {
  switch (kind_) {
    case Kind::flat:
      return p_[0];
    case Kind::wall:
      return p_[2] + (x >= p_[0] ? p_[1] : 0.0);
    case Kind::plateau_gap: {
      const double ywin = box_window(y, p_[5], p_[6], p_[7]);
      if (ywin == 0.0) return 0.0;
      const double a = box_window(x, p_[1], p_[2], p_[7]);
      const double b = box_window(x, p_[3], p_[4], p_[7]);
      const double slot = box_window(x, p_[2], p_[3], p_[7]);
      return ywin * (p_[0] * (a + b) + p_[8] * slot);
    }
    case Kind::undulating:
      return p_[3] + p_[0] * std::sin(2.0 * std::numbers::pi * x / p_[1]) *
                         std::cos(2.0 * std::numbers::pi * y / p_[2]);
  }
  return 0.0;
}

double Heightfield::slope_bound() const {
  switch (kind_) {
    case Kind::flat:
      return 0.0;
    case Kind::wall:
      return kInf;
    case Kind::plateau_gap: {
      // smoothstep slope peaks at 1.5/w. Along x a plateau edge and the
      // slot edge transition together (swing height + |depth|); along y the
      // window modulates at most max(height, |depth|).
      const double gx = 1.5 * (p_[0] + std::abs(p_[8])) / p_[7];
      const double gy = 1.5 * std::max(p_[0], std::abs(p_[8])) / p_[7];
      return std::hypot(gx, gy);
    }
    case Kind::undulating: {
      const double gx = p_[0] * 2.0 * std::numbers::pi / p_[1];
      const double gy = p_[0] * 2.0 * std::numbers::pi / p_[2];
      return std::hypot(gx, gy);
    }
  }
  return kInf;
}

Trajectory make_transect(const io::TrajectoryConfig& cfg) {
  Trajectory traj;
  const int count =
      static_cast<int>(std::floor((cfg.x_end - cfg.x_start) / cfg.step + 0.5)) + 1;
  traj.steps.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Trajectory::Step s;
    s.t = 0.1 * k;
    s.pose = geometry::Pose(
        {cfg.x_start + k * cfg.step, cfg.y, -cfg.elevation}, {});
    traj.steps.push_back(s);
  }
  return traj;
}

geometry::Pose camera_extrinsic(double tilt_down_deg) {
  const double a = tilt_down_deg * std::numbers::pi / 180.0;
  // Camera axes in the base frame at zero tilt: x -> +y (right),
  // y -> +z (down), z -> +x (forward).
  geometry::Mat3 r0;
  r0 << 0, 0, 1,
        1, 0, 0,
        0, 1, 0;
  geometry::Mat3 tilt;
  tilt << std::cos(a), 0, -std::sin(a),
          0, 1, 0,
          std::sin(a), 0, std::cos(a);
  return geometry::Pose(geometry::Vec3::Zero(),
                        geometry::Rotation::from_matrix(tilt * r0));
}

namespace {

struct Ray {
  Eigen::Vector3d origin;
  Eigen::Vector3d dir;  // unit
};

double ray_clearance(const Heightfield& hf, const Ray& ray, double s) {
  const Eigen::Vector3d p = ray.origin + s * ray.dir;
  return -p.z() - hf(p.x(), p.y());
}

double bisect_hit(const Heightfield& hf, const Ray& ray, double lo, double hi) {
  while (hi - lo > kBisectTol) {
    const double mid = 0.5 * (lo + hi);
    if (ray_clearance(hf, ray, mid) <= 0.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double march_fixed(const Heightfield& hf, const Ray& ray, double max_range,
                   double step) {
  if (ray_clearance(hf, ray, 0.0) <= 0.0) return 0.0;
  double prev = 0.0;
  for (double s = step; prev < max_range; s += step) {
    const double cur = std::min(s, max_range);
    if (ray_clearance(hf, ray, cur) <= 0.0) {
      return bisect_hit(hf, ray, prev, cur);
    }
    prev = cur;
  }
  return kInf;
}

double march_bounded(const Heightfield& hf, const Ray& ray, double max_range,
                     double slope_bound) {
  double c = ray_clearance(hf, ray, 0.0);
  if (c <= 0.0) return 0.0;
  const double rate = std::abs(ray.dir.z()) +
                      slope_bound * std::hypot(ray.dir.x(), ray.dir.y()) + 1e-12;
  double s = 0.0;
  while (s < max_range) {
    double step = 0.9 * c / rate;
    step = std::clamp(step, kBisectTol, 1.0);
    const double s2 = std::min(s + step, max_range);
    const double c2 = ray_clearance(hf, ray, s2);
    if (c2 <= 0.0) {
      return bisect_hit(hf, ray, s, s2);
    }
    s = s2;
    c = c2;
  }
  return kInf;
}

template <typename Marcher>
RangeImage raycast_with(const Heightfield& hf, const geometry::Pose& sensor_pose,
                        const sensor::CameraIntrinsics& intr, double max_range,
                        Marcher march) {
  intr.validate();
  RangeImage img;
  img.width = intr.width;
  img.height = intr.height;
  img.range.resize(static_cast<std::size_t>(intr.width) * intr.height);

  const Eigen::Matrix3d rot = sensor_pose.rotation.matrix();
  const Eigen::Vector3d origin = sensor_pose.translation;

  const auto fill_rows = [&](int v0, int v1) {
    for (int v = v0; v < v1; ++v) {
      for (int u = 0; u < intr.width; ++u) {
        Eigen::Vector3d d((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
        d.normalize();
        Ray ray{origin, rot * d};
        const double hit = march(hf, ray, max_range);
        img.range[static_cast<std::size_t>(v) * intr.width + u] =
            static_cast<float>(hit);
      }
    }
  };

  const std::size_t pixels = img.range.size();
  unsigned threads = std::thread::hardware_concurrency();
  threads = std::min(threads == 0 ? 1u : threads, 8u);
  if (pixels < 32768 || threads <= 1) {
    fill_rows(0, intr.height);
    return img;
  }
  std::vector<std::thread> pool;
  const int rows_per = (intr.height + static_cast<int>(threads) - 1) /
                       static_cast<int>(threads);
  for (unsigned t = 0; t < threads; ++t) {
    const int v0 = static_cast<int>(t) * rows_per;
    const int v1 = std::min(intr.height, v0 + rows_per);
    if (v0 >= v1) break;
    pool.emplace_back(fill_rows, v0, v1);
  }
  for (auto& th : pool) th.join();
  return img;
}

} // namespace

RangeImage raycast(const Heightfield& hf, const geometry::Pose& sensor_pose,
                   const sensor::CameraIntrinsics& intr, double max_range) {
  const double bound = hf.slope_bound();
  if (std::isinf(bound)) {
    return raycast_with(hf, sensor_pose, intr, max_range,
                        [](const Heightfield& h, const Ray& r, double m) {
                          return march_fixed(h, r, m, 0.01);
                        });
  }
  return raycast_with(hf, sensor_pose, intr, max_range,
                      [bound](const Heightfield& h, const Ray& r, double m) {
                        return march_bounded(h, r, m, bound);
                      });
}

RangeImage raycast_fixed_step(const Heightfield& hf,
                              const geometry::Pose& sensor_pose,
                              const sensor::CameraIntrinsics& intr,
                              double max_range, double step) {
  return raycast_with(hf, sensor_pose, intr, max_range,
                      [step](const Heightfield& h, const Ray& r, double m) {
                        return march_fixed(h, r, m, step);
                      });
}

sensor::RangeClassImage classify(const RangeImage& ranges,
                                 const sensor::RangeClassScheme& scheme,
                                 const DegradationModel& degradation) {
  scheme.validate();
  if (degradation.epsilon < 0.0 || degradation.epsilon > 1.0 ||
      degradation.smear < 0) {
    throw std::invalid_argument("degradation epsilon must be in [0, 1]");
  }
  const std::size_t classes = scheme.class_count();
  sensor::RangeClassImage img(ranges.width, ranges.height, classes);
  const std::size_t n = img.pixel_count();

  std::vector<float> edges(scheme.bin_edges.begin(), scheme.bin_edges.end());
  kernels::bin_ranges(ranges.range.data(), n, classes, edges.data(),
                      img.data().data());

  if (degradation.epsilon != 0.0) {
    kernels::blend_uniform(img.data().data(), n, classes,
                           static_cast<float>(degradation.epsilon));
  }

  if (degradation.smear > 0) {
    const int k = degradation.smear;
    const int w = ranges.width, h = ranges.height;
    std::vector<double> rowsum(n), colsum(n);
    std::vector<float> out(n);
    for (std::size_t c = 0; c < classes; ++c) {
      const float* plane = img.plane(c);
      // Horizontal then vertical windowed sums; counts normalize at edges.
      for (int v = 0; v < h; ++v) {
        for (int u = 0; u < w; ++u) {
          double s = 0.0;
          for (int du = std::max(0, u - k); du <= std::min(w - 1, u + k); ++du) {
            s += plane[static_cast<std::size_t>(v) * w + du];
          }
          rowsum[static_cast<std::size_t>(v) * w + u] = s;
        }
      }
      for (int v = 0; v < h; ++v) {
        const int cnt_v = std::min(h - 1, v + k) - std::max(0, v - k) + 1;
        for (int u = 0; u < w; ++u) {
          double s = 0.0;
          for (int dv = std::max(0, v - k); dv <= std::min(h - 1, v + k); ++dv) {
            s += rowsum[static_cast<std::size_t>(dv) * w + u];
          }
          const int cnt_u = std::min(w - 1, u + k) - std::max(0, u - k) + 1;
          colsum[static_cast<std::size_t>(v) * w + u] =
              s / (static_cast<double>(cnt_u) * cnt_v);
        }
      }
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = static_cast<float>(colsum[i]);
      }
      std::copy(out.begin(), out.end(), img.plane(c));
    }
  }
  return img;
}

ScenarioResult run_scenario(const io::ScenarioConfig& cfg) {
  return run_scenario_with_trajectory(cfg, make_transect(cfg.trajectory));
}

ScenarioResult run_scenario_with_trajectory(const io::ScenarioConfig& cfg,
                                            const Trajectory& trajectory) {
  cfg.validate();
  const sensor::RangeClassScheme scheme = cfg.scheme.build();
  const sensor::CameraIntrinsics intr = sensor::CameraIntrinsics::from_hfov(
      cfg.camera.width, cfg.camera.height, cfg.camera.hfov_deg);
  const Heightfield hf = Heightfield::from_config(cfg.world);
  const geometry::Pose extrinsic = camera_extrinsic(cfg.camera.tilt_down_deg);
  const DegradationModel degradation{cfg.degradation.epsilon,
                                     cfg.degradation.smear, cfg.seed};

  mapping::MapConfig map_cfg{cfg.map.resolution, cfg.map.side};
  ScenarioResult res{mapping::ElevationMap(map_cfg), {}, {}, {}, 0.0};

  if (trajectory.steps.empty()) {
    res.fused = res.map.fuse();
    res.truth = io::GridData::allocate(res.map.cells(), res.map.cells(),
                                       res.map.resolution(), res.map.origin_x(),
                                       res.map.origin_y());
    return res;
  }

  geometry::Mat6 step_cov = geometry::Mat6::Zero();
  const double ts = cfg.noise.translation_sigma;
  const double rs = cfg.noise.rotation_sigma_deg * std::numbers::pi / 180.0;
  step_cov.diagonal() << ts * ts, ts * ts, ts * ts, rs * rs, rs * rs, rs * rs;

  GaussianSampler noise(cfg.seed);

  geometry::Vec3 believed_t = trajectory.steps[0].pose.translation;
  geometry::Rotation believed_r = trajectory.steps[0].pose.rotation;
  geometry::Mat6 cum_cov = geometry::Mat6::Zero();

  res.map.reset(believed_t.x(), believed_t.y(), -believed_t.z());
  const double ref0 = -trajectory.steps[0].pose.translation.z();

  std::vector<float> mean_plane, var_plane;
  std::vector<float> reps(scheme.representative_ranges.begin(),
                          scheme.representative_ranges.end());
  double sigma_sum = 0.0;

  for (std::size_t k = 0; k < trajectory.steps.size(); ++k) {
    const auto& step = trajectory.steps[k];
    if (k > 0) {
      const auto& prev = trajectory.steps[k - 1];
      geometry::Vec3 d_true = step.pose.translation - prev.pose.translation;
      geometry::Rotation d_rot = geometry::Rotation::compose(
          prev.pose.rotation.inverse(), step.pose.rotation);
      geometry::Vec3 d_bel = d_true;
      if (cfg.noise.sample) {
        d_bel += geometry::Vec3(ts * noise.next(), ts * noise.next(),
                                ts * noise.next());
        const geometry::Rotation jitter(rs * noise.next(), rs * noise.next(),
                                        rs * noise.next());
        d_rot = geometry::Rotation::compose(d_rot, jitter);
      }
      believed_t += d_bel;
      believed_r = geometry::Rotation::compose(believed_r, d_rot);
      cum_cov += step_cov;
      res.map.motion_update(geometry::Pose(d_bel, d_rot, step_cov));
    }

    const geometry::Pose sensor_true =
        geometry::compose(geometry::Pose(step.pose.translation, step.pose.rotation),
                          extrinsic);
    const RangeImage rimg = raycast(hf, sensor_true, intr, cfg.world.max_range);
    const sensor::RangeClassImage cimg = classify(rimg, scheme, degradation);

    const std::size_t n = cimg.pixel_count();
    mean_plane.resize(n);
    var_plane.resize(n);
    kernels::range_moments(cimg.data().data(), n, cimg.classes(), reps.data(),
                           mean_plane.data(), var_plane.data());
    double var_sum = 0.0;
    for (float v : var_plane) var_sum += v;
    const double mean_s2 = var_sum / static_cast<double>(n);
    sigma_sum += mean_s2;

    const auto points = sensor::sense(cimg, intr, scheme);
    geometry::Pose sensor_bel =
        geometry::compose(geometry::Pose(believed_t, believed_r), extrinsic);
    sensor_bel.covariance = cum_cov;
    const mapping::ScanStats stats = res.map.integrate_scan(points, sensor_bel);

    StepLog log;
    log.step = static_cast<int>(k);
    log.t = step.t;
    log.x = believed_t.x();
    log.y = believed_t.y();
    log.points = stats.points;
    log.integrated = stats.integrated;
    log.skipped_outside = stats.skipped_outside;
    log.cells_touched = stats.cells_touched;
    log.mean_sigma2_z = mean_s2;
    res.logs.push_back(log);
  }

  res.mean_sigma2_z = sigma_sum / static_cast<double>(trajectory.steps.size());
  res.fused = res.map.fuse();

  res.truth = io::GridData::allocate(res.map.cells(), res.map.cells(),
                                     res.map.resolution(), res.map.origin_x(),
                                     res.map.origin_y());
  for (int j = 0; j < res.map.cells(); ++j) {
    for (int i = 0; i < res.map.cells(); ++i) {
      const double x = res.map.origin_x() + i * res.map.resolution();
      const double y = res.map.origin_y() + j * res.map.resolution();
      const std::size_t idx = static_cast<std::size_t>(j) * res.map.cells() + i;
      res.truth.height[idx] = static_cast<float>(hf(x, y) - ref0);
      res.truth.observed[idx] = 1.0f;
    }
  }
  return res;
}

} // namespace reefmap::sim
