#pragma once

#include "reefmap/config.hpp"

// Per-stage latency measurement of the map update path. One synthetic frame
// is rendered from the scenario config; each iteration then runs
// sense -> motion_update -> integrate_scan on a live map, with fuse timed
// separately since the fused-map step is optional for real-time use.
namespace reefmap::bench {

struct StageStats {
  double median_ms = 0.0;
  double p95_ms = 0.0;
};

struct BenchResult {
  int iterations = 0;
  StageStats sense;
  StageStats motion_update;
  StageStats integrate_scan;
  StageStats frame;  // sense + motion_update + integrate_scan per iteration
  StageStats fuse;
  std::size_t points_per_frame = 0;
};

BenchResult run_bench(const io::ScenarioConfig& cfg, int iterations = 200);

} // namespace reefmap::bench
