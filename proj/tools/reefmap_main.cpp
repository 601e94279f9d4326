// reefmap command line: simulate / evaluate / sweep / bench.
//
// Exit codes: 0 success, 2 usage or config error, 3 I/O or format error,
// 4 numeric failure.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "reefmap/bench.hpp"
#include "reefmap/config.hpp"
#include "reefmap/evaluate.hpp"
#include "reefmap/io_formats.hpp"
#include "reefmap/sim_world.hpp"
#include "reefmap/version.hpp"

namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Seed precedence: config < REEFMAP_SEED < --seed.
std::uint64_t resolve_seed(std::uint64_t config_seed, bool flag_set,
                           std::uint64_t flag_seed) {
  std::uint64_t seed = config_seed;
  if (const char* env = std::getenv("REEFMAP_SEED")) {
    try {
      seed = std::stoull(env);
    } catch (const std::exception&) {
      throw reefmap::io::config_error("REEFMAP_SEED is not an unsigned integer");
    }
  }
  if (flag_set) seed = flag_seed;
  return seed;
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    const std::string item =
        text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw reefmap::io::config_error(std::string(what) + ": bad number '" + item + "'");
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

struct SimulateArgs {
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_simulate(const SimulateArgs& args) {
  const auto t_start = Clock::now();
  reefmap::io::ScenarioConfig cfg = reefmap::io::read_config(args.config);
  cfg.seed = resolve_seed(cfg.seed, args.seed_set, args.seed);

  fs::create_directories(args.out);
  const fs::path out(args.out);

  const auto t_sim = Clock::now();
  const reefmap::sim::ScenarioResult res = reefmap::sim::run_scenario(cfg);
  const double sim_ms = ms_since(t_sim);

  const auto t_export = Clock::now();
  const reefmap::io::GridData raw = res.map.snapshot();
  const reefmap::io::GridData fused = res.map.snapshot(&res.fused);
  reefmap::io::write_grid(raw, out / "raw_map.egrid");
  reefmap::io::write_grid(fused, out / "fused_map.egrid");
  reefmap::io::write_grid(res.truth, out / "truth.egrid");

  {
    reefmap::io::CsvWriter steps(out / "steps.csv",
                                 {"step", "t", "x", "y", "points", "integrated",
                                  "skipped_outside", "cells_touched",
                                  "mean_sigma2_z"});
    for (const auto& log : res.logs) {
      const double row[] = {static_cast<double>(log.step), log.t, log.x, log.y,
                            static_cast<double>(log.points),
                            static_cast<double>(log.integrated),
                            static_cast<double>(log.skipped_outside),
                            static_cast<double>(log.cells_touched),
                            log.mean_sigma2_z};
      steps.row(row);
    }
    steps.close();
  }
  const double export_ms = ms_since(t_export);

  reefmap::io::RunManifest manifest;
  manifest.tool_version = reefmap::kVersion;
  manifest.config_path = args.config;
  manifest.config_hash = reefmap::io::hash_file(args.config);
  manifest.seed = cfg.seed;
  for (const char* name :
       {"raw_map.egrid", "fused_map.egrid", "truth.egrid", "steps.csv"}) {
    manifest.output_hashes[name] = hex64(reefmap::io::hash_file(out / name));
  }
  manifest.timings_ms["simulate"] = sim_ms;
  manifest.timings_ms["export"] = export_ms;
  manifest.timings_ms["total"] = ms_since(t_start);
  reefmap::io::write_manifest(manifest, out / "manifest.json");

  std::printf("simulate: %zu steps, %zu observed cells, outputs in %s\n",
              res.logs.size(), res.map.observed_count(), args.out.c_str());
  return kExitOk;
}

struct EvaluateArgs {
  std::string run_dir;
  std::string sections = "0,0.5,1";
  char axis = 'y';
  double corridor_y = 0.0;
  double corridor_halfwidth = 0.5;
};

int cmd_evaluate(const EvaluateArgs& args) {
  const auto t_start = Clock::now();
  const fs::path dir(args.run_dir);
  const reefmap::io::GridData fused = reefmap::io::read_grid(dir / "fused_map.egrid");
  const reefmap::io::GridData truth = reefmap::io::read_grid(dir / "truth.egrid");

  const reefmap::eval::ErrorMap em = reefmap::eval::error_map(fused, truth);
  const auto corridor =
      reefmap::eval::Region::corridor(args.corridor_y, args.corridor_halfwidth);
  const reefmap::eval::ErrorStats cstats = reefmap::eval::region_stats(em, corridor);
  const double coverage = reefmap::eval::bounds_coverage(fused, truth);
  const double corridor_coverage =
      reefmap::eval::bounds_coverage(fused, truth, corridor);

  {
    reefmap::io::CsvWriter metrics(dir / "metrics.csv",
                                   {"max_error", "mean_error", "rmse", "count",
                                    "coverage", "corridor_max_error",
                                    "corridor_mean_error", "corridor_rmse",
                                    "corridor_count", "corridor_coverage"});
    const double row[] = {em.stats.max_error, em.stats.mean_error, em.stats.rmse,
                          static_cast<double>(em.stats.count), coverage,
                          cstats.max_error, cstats.mean_error, cstats.rmse,
                          static_cast<double>(cstats.count), corridor_coverage};
    metrics.row(row);
    metrics.close();
  }

  for (double value : parse_list(args.sections, "--sections")) {
    const auto cs = reefmap::eval::cross_section(fused, truth, args.axis, value);
    char name[64];
    std::snprintf(name, sizeof name, "cross_section_%c%s.csv", args.axis,
                  reefmap::io::format_csv_value(value).c_str());
    reefmap::io::CsvWriter csv(dir / name,
                               {"coord", "h_est", "h_min", "h_max", "h_true"});
    for (const auto& s : cs.samples) {
      const double row[] = {s.coord, s.h_est, s.h_min, s.h_max, s.h_true};
      csv.row(row);
    }
    csv.close();
  }

  reefmap::eval::write_error_heatmap(em, dir / "error_map.pgm");

  // Fold evaluation outputs into the run's single manifest.
  reefmap::io::RunManifest manifest;
  try {
    manifest = reefmap::io::read_manifest(dir / "manifest.json");
  } catch (const reefmap::io::io_error&) {
    manifest.tool_version = reefmap::kVersion;
  }
  manifest.output_hashes["metrics.csv"] = hex64(reefmap::io::hash_file(dir / "metrics.csv"));
  manifest.output_hashes["error_map.pgm"] = hex64(reefmap::io::hash_file(dir / "error_map.pgm"));
  manifest.timings_ms["evaluate"] = ms_since(t_start);
  reefmap::io::write_manifest(manifest, dir / "manifest.json");

  std::printf("evaluate: max %.4g rmse %.4g coverage %.4g (corridor max %.4g "
              "rmse %.4g coverage %.4g)\n",
              em.stats.max_error, em.stats.rmse, coverage, cstats.max_error,
              cstats.rmse, corridor_coverage);
  return kExitOk;
}

struct SweepArgs {
  std::string config;
  std::string eps = "0,0.1,0.2,0.3,0.4,0.5";
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_sweep(const SweepArgs& args) {
  const auto t_start = Clock::now();
  reefmap::io::ScenarioConfig cfg = reefmap::io::read_config(args.config);
  cfg.seed = resolve_seed(cfg.seed, args.seed_set, args.seed);
  const std::vector<double> epsilons = parse_list(args.eps, "--eps");

  fs::create_directories(args.out);
  const fs::path out(args.out);

  const auto rows = reefmap::eval::degradation_sweep(cfg, epsilons);
  {
    reefmap::io::CsvWriter csv(out / "sweep.csv",
                               {"epsilon", "mean_sigma2_z", "rmse", "coverage"});
    for (const auto& r : rows) {
      const double row[] = {r.epsilon, r.mean_sigma2_z, r.rmse, r.coverage};
      csv.row(row);
    }
    csv.close();
  }

  reefmap::io::RunManifest manifest;
  manifest.tool_version = reefmap::kVersion;
  manifest.config_path = args.config;
  manifest.config_hash = reefmap::io::hash_file(args.config);
  manifest.seed = cfg.seed;
  manifest.output_hashes["sweep.csv"] = hex64(reefmap::io::hash_file(out / "sweep.csv"));
  manifest.timings_ms["total"] = ms_since(t_start);
  reefmap::io::write_manifest(manifest, out / "manifest.json");

  std::printf("sweep: %zu rows written to %s\n", rows.size(), args.out.c_str());
  return kExitOk;
}

struct BenchArgs {
  std::string config;
  int iterations = 200;
};

int cmd_bench(const BenchArgs& args) {
  const reefmap::io::ScenarioConfig cfg = reefmap::io::read_config(args.config);
  const auto r = reefmap::bench::run_bench(cfg, args.iterations);
  std::printf("stage,median_ms,p95_ms\n");
  std::printf("sense,%.4f,%.4f\n", r.sense.median_ms, r.sense.p95_ms);
  std::printf("motion_update,%.4f,%.4f\n", r.motion_update.median_ms,
              r.motion_update.p95_ms);
  std::printf("integrate_scan,%.4f,%.4f\n", r.integrate_scan.median_ms,
              r.integrate_scan.p95_ms);
  std::printf("frame,%.4f,%.4f\n", r.frame.median_ms, r.frame.p95_ms);
  std::printf("fuse,%.4f,%.4f\n", r.fuse.median_ms, r.fuse.p95_ms);
  std::printf("# %d iterations, %zu points per frame\n", r.iterations,
              r.points_per_frame);
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probabilistic robot-centric underwater elevation mapping "
               "from coarse range classes"};
  app.set_version_flag("--version", reefmap::kVersion);
  app.require_subcommand(1);

  SimulateArgs sim_args;
  auto* sim = app.add_subcommand("simulate", "Run a scenario and export grids");
  sim->add_option("--config", sim_args.config, "Scenario config file")->required();
  sim->add_option("--out", sim_args.out, "Output directory")->required();
  auto* sim_seed = sim->add_option("--seed", sim_args.seed, "Override the seed");

  EvaluateArgs eval_args;
  auto* ev = app.add_subcommand("evaluate", "Compare a run against its ground truth");
  ev->add_option("--run", eval_args.run_dir, "Run directory from simulate")->required();
  ev->add_option("--sections", eval_args.sections, "Cross-section coordinates");
  ev->add_option("--axis", eval_args.axis, "Cross-section fixed axis (x or y)");
  ev->add_option("--corridor-y", eval_args.corridor_y, "Corridor center");
  ev->add_option("--corridor-halfwidth", eval_args.corridor_halfwidth,
                 "Corridor half width");

  SweepArgs sweep_args;
  auto* sw = app.add_subcommand("sweep", "Degradation sweep over epsilon values");
  sw->add_option("--config", sweep_args.config, "Scenario config file")->required();
  sw->add_option("--eps", sweep_args.eps, "Comma-separated epsilon list");
  sw->add_option("--out", sweep_args.out, "Output directory")->required();
  auto* sweep_seed = sw->add_option("--seed", sweep_args.seed, "Override the seed");

  BenchArgs bench_args;
  auto* be = app.add_subcommand("bench", "Per-stage latency of the update path");
  be->add_option("--config", bench_args.config, "Scenario config file")->required();
  be->add_option("--iters", bench_args.iterations, "Iteration count (>= 200 advised)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    sim_args.seed_set = sim_seed->count() > 0;
    sweep_args.seed_set = sweep_seed->count() > 0;
    if (sim->parsed()) return cmd_simulate(sim_args);
    if (ev->parsed()) return cmd_evaluate(eval_args);
    if (sw->parsed()) return cmd_sweep(sweep_args);
    if (be->parsed()) return cmd_bench(bench_args);
  } catch (const reefmap::io::config_error& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const reefmap::io::io_error& e) {
    std::fprintf(stderr, "io error: %s\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitUsage;
}
