#include "reefmap/bench.hpp"

#include <algorithm>
#include <chrono>
#include <numbers>
#include <vector>

#include "reefmap/sim_world.hpp"

namespace reefmap::bench {

namespace {

using Clock = std::chrono::steady_clock;

double ms_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double, std::milli>(b - a).count();
}

StageStats stats_of(std::vector<double>& samples) {
  std::sort(samples.begin(), samples.end());
  StageStats st;
  if (samples.empty()) return st;
  st.median_ms = samples[samples.size() / 2];
  st.p95_ms = samples[std::min(samples.size() - 1,
                               static_cast<std::size_t>(samples.size() * 0.95))];
  return st;
}

} // namespace

BenchResult run_bench(const io::ScenarioConfig& cfg, int iterations) {
  cfg.validate();
  if (iterations < 1) {
    throw std::invalid_argument("bench needs at least one iteration");
  }

  const sensor::RangeClassScheme scheme = cfg.scheme.build();
  const sensor::CameraIntrinsics intr = sensor::CameraIntrinsics::from_hfov(
      cfg.camera.width, cfg.camera.height, cfg.camera.hfov_deg);
  const sim::Heightfield hf = sim::Heightfield::from_config(cfg.world);
  const geometry::Pose extrinsic = sim::camera_extrinsic(cfg.camera.tilt_down_deg);

  // One representative frame from the middle of the transect.
  const sim::Trajectory traj = sim::make_transect(cfg.trajectory);
  const geometry::Pose base = traj.steps[traj.steps.size() / 2].pose;
  const geometry::Pose sensor_pose = geometry::compose(base, extrinsic);
  const sim::RangeImage rimg = sim::raycast(hf, sensor_pose, intr, cfg.world.max_range);
  const sim::DegradationModel degr{cfg.degradation.epsilon, cfg.degradation.smear,
                                   cfg.seed};
  const sensor::RangeClassImage cimg = sim::classify(rimg, scheme, degr);

  const double ts = cfg.noise.translation_sigma;
  const double rs = cfg.noise.rotation_sigma_deg * std::numbers::pi / 180.0;
  geometry::Mat6 step_cov = geometry::Mat6::Zero();
  step_cov.diagonal() << ts * ts, ts * ts, ts * ts, rs * rs, rs * rs, rs * rs;
  const geometry::Pose delta({cfg.trajectory.step, 0.0, 0.0}, {}, step_cov);

  mapping::ElevationMap map({cfg.map.resolution, cfg.map.side});
  map.reset(base.translation.x(), base.translation.y(), -base.translation.z());

  BenchResult result;
  result.iterations = iterations;
  std::vector<double> t_sense, t_motion, t_integrate, t_frame, t_fuse;
  t_sense.reserve(iterations);
  t_motion.reserve(iterations);
  t_integrate.reserve(iterations);
  t_frame.reserve(iterations);

  geometry::Pose pose = sensor_pose;
  pose.covariance = step_cov;
  for (int it = 0; it < iterations; ++it) {
    const auto t0 = Clock::now();
    const auto points = sensor::sense(cimg, intr, scheme);
    const auto t1 = Clock::now();
    map.motion_update(delta);
    const auto t2 = Clock::now();
    pose.translation.x() += cfg.trajectory.step;
    map.integrate_scan(points, pose);
    const auto t3 = Clock::now();
    result.points_per_frame = points.size();
    t_sense.push_back(ms_between(t0, t1));
    t_motion.push_back(ms_between(t1, t2));
    t_integrate.push_back(ms_between(t2, t3));
    t_frame.push_back(ms_between(t0, t3));
  }

  const int fuse_iters = std::max(10, iterations / 10);
  t_fuse.reserve(fuse_iters);
  for (int it = 0; it < fuse_iters; ++it) {
    const auto t0 = Clock::now();
    const auto fused = map.fuse();
    const auto t1 = Clock::now();
    t_fuse.push_back(ms_between(t0, t1));
  }

  result.sense = stats_of(t_sense);
  result.motion_update = stats_of(t_motion);
  result.integrate_scan = stats_of(t_integrate);
  result.frame = stats_of(t_frame);
  result.fuse = stats_of(t_fuse);
  return result;
}

} // namespace reefmap::bench
