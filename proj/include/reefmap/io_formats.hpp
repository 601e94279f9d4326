#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "reefmap/range_sensor.hpp"

// On-disk formats: EGRID elevation grids, RCI range-class images, CSV
// tables, 16-bit PGM heatmaps, and the run manifest. Byte-level layouts are
// documented in FORMATS.md.
namespace reefmap::io {

class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt or unsupported file contents (bad magic, truncation, ...).
class format_error : public io_error {
 public:
  using io_error::io_error;
};

// One elevation grid with its layer set. Layers are row-major
// [v * cells_x + u]; cell (u, v) center sits at
// (origin_x + u * resolution, origin_y + v * resolution). NaN encodes
// unobserved cells.
struct GridData {
  int cells_x = 0;
  int cells_y = 0;
  double resolution = 0.0;
  double origin_x = 0.0;
  double origin_y = 0.0;

  std::vector<float> height;
  std::vector<float> height_variance;
  std::vector<float> horizontal_variance;
  std::vector<float> fused_height;
  std::vector<float> h_min;
  std::vector<float> h_max;
  std::vector<float> observed;  // 0 / 1

  std::size_t cell_count() const {
    return static_cast<std::size_t>(cells_x) * static_cast<std::size_t>(cells_y);
  }
  /// All seven layers sized cell_count(), NaN-filled except observed (0).
  static GridData allocate(int cells_x, int cells_y, double resolution,
                           double origin_x, double origin_y);
  bool same_geometry(const GridData& other) const;
};

void write_grid(const GridData& grid, const std::filesystem::path& path);
GridData read_grid(const std::filesystem::path& path);

void write_rci(const sensor::RangeClassImage& image,
               const std::filesystem::path& path);
sensor::RangeClassImage read_rci(const std::filesystem::path& path);

// Deterministically formatted CSV (%.10g fields, '\n' line ends).
class CsvWriter {
 public:
  CsvWriter(const std::filesystem::path& path,
            const std::vector<std::string>& columns);
  void row(std::span<const double> values);
  void close();
  ~CsvWriter();

 private:
  std::filesystem::path path_;
  std::string buffer_;
  std::size_t columns_;
  bool closed_ = false;
};

std::string format_csv_value(double v);

/// 16-bit binary PGM plus a sidecar "<path>.txt" recording the value-to-gray
/// scaling. Gray 0 is reserved for NaN (unobserved); finite values map
/// linearly onto [1, 65535] over [vmin, vmax].
void write_pgm16(const std::filesystem::path& path,
                 std::span<const double> values, int width, int height,
                 double vmin, double vmax);

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes);
std::uint64_t hash_file(const std::filesystem::path& path);

struct RunManifest {
  std::string tool_version;
  std::string config_path;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> output_hashes;  // file name -> hex hash
  std::map<std::string, double> timings_ms;
};

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path);
RunManifest read_manifest(const std::filesystem::path& path);

} // namespace reefmap::io
