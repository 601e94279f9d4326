#include "reefmap/io_formats.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace reefmap::io {

namespace {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats assume a little-endian host");

constexpr int kMaxCells = 1 << 16;

void write_bytes(std::ofstream& out, const void* data, std::size_t size,
                 const std::filesystem::path& path) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) {
    throw io_error("failed writing " + path.string());
  }
}

std::string read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw io_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return std::move(ss).str();
}

// First '\n'-terminated line of a buffer; returns offset past the newline.
std::size_t header_line(const std::string& bytes, std::string& line,
                        const std::filesystem::path& path) {
  const auto pos = bytes.find('\n');
  if (pos == std::string::npos) {
    throw format_error(path.string() + ": missing header line");
  }
  line = bytes.substr(0, pos);
  return pos + 1;
}

void check_payload(std::size_t expected, std::size_t actual,
                   const std::filesystem::path& path) {
  if (expected != actual) {
    throw format_error(path.string() + ": payload size mismatch, expected " +
                       std::to_string(expected) + " bytes, got " +
                       std::to_string(actual));
  }
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

} // namespace

GridData GridData::allocate(int cells_x, int cells_y, double resolution,
                            double origin_x, double origin_y) {
  GridData g;
  g.cells_x = cells_x;
  g.cells_y = cells_y;
  g.resolution = resolution;
  g.origin_x = origin_x;
  g.origin_y = origin_y;
  const float nan = std::numeric_limits<float>::quiet_NaN();
  g.height.assign(g.cell_count(), nan);
  g.height_variance.assign(g.cell_count(), nan);
  g.horizontal_variance.assign(g.cell_count(), nan);
  g.fused_height.assign(g.cell_count(), nan);
  g.h_min.assign(g.cell_count(), nan);
  g.h_max.assign(g.cell_count(), nan);
  g.observed.assign(g.cell_count(), 0.0f);
  return g;
}

bool GridData::same_geometry(const GridData& other) const {
  return cells_x == other.cells_x && cells_y == other.cells_y &&
         resolution == other.resolution && origin_x == other.origin_x &&
         origin_y == other.origin_y;
}

void write_grid(const GridData& grid, const std::filesystem::path& path) {
  const std::vector<float>* layers[7] = {
      &grid.height, &grid.height_variance, &grid.horizontal_variance,
      &grid.fused_height, &grid.h_min, &grid.h_max, &grid.observed};
  for (const auto* layer : layers) {
    if (layer->size() != grid.cell_count()) {
      throw std::invalid_argument("grid layer size does not match cell count");
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create " + path.string());
  }
  char header[160];
  const int len =
      std::snprintf(header, sizeof header, "EGRID %d %d %.17g %.17g %.17g\n",
                    grid.cells_x, grid.cells_y, grid.resolution, grid.origin_x,
                    grid.origin_y);
  write_bytes(out, header, static_cast<std::size_t>(len), path);
  for (const auto* layer : layers) {
    write_bytes(out, layer->data(), layer->size() * sizeof(float), path);
  }
}

GridData read_grid(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::string line;
  const std::size_t offset = header_line(bytes, line, path);

  std::istringstream hs(line);
  std::string magic;
  GridData grid;
  hs >> magic >> grid.cells_x >> grid.cells_y >> grid.resolution >>
      grid.origin_x >> grid.origin_y;
  if (magic != "EGRID") {
    throw format_error(path.string() + ": unknown magic '" + magic + "'");
  }
  if (hs.fail()) {
    throw format_error(path.string() + ": malformed EGRID header");
  }
  if (grid.cells_x <= 0 || grid.cells_y <= 0 || grid.cells_x > kMaxCells ||
      grid.cells_y > kMaxCells) {
    throw format_error(path.string() + ": grid dimensions out of range");
  }
  if (!(grid.resolution > 0.0)) {
    throw format_error(path.string() + ": non-positive resolution");
  }

  const std::size_t n = grid.cell_count();
  check_payload(7 * n * sizeof(float), bytes.size() - offset, path);

  std::vector<float>* layers[7] = {
      &grid.height, &grid.height_variance, &grid.horizontal_variance,
      &grid.fused_height, &grid.h_min, &grid.h_max, &grid.observed};
  const char* src = bytes.data() + offset;
  for (auto* layer : layers) {
    layer->resize(n);
    std::memcpy(layer->data(), src, n * sizeof(float));
    src += n * sizeof(float);
  }
  return grid;
}

void write_rci(const sensor::RangeClassImage& image,
               const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create " + path.string());
  }
  char header[64];
  const int len = std::snprintf(header, sizeof header, "RCI %d %d %zu\n",
                                image.width(), image.height(), image.classes());
  write_bytes(out, header, static_cast<std::size_t>(len), path);
  write_bytes(out, image.data().data(), image.data().size() * sizeof(float), path);
}

sensor::RangeClassImage read_rci(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  std::string line;
  const std::size_t offset = header_line(bytes, line, path);

  std::istringstream hs(line);
  std::string magic;
  int width = 0, height = 0;
  std::size_t classes = 0;
  hs >> magic >> width >> height >> classes;
  if (magic != "RCI") {
    throw format_error(path.string() + ": unknown magic '" + magic + "'");
  }
  if (hs.fail() || width <= 0 || height <= 0 || classes == 0 || classes > 64 ||
      width > kMaxCells || height > kMaxCells) {
    throw format_error(path.string() + ": malformed RCI header");
  }
  sensor::RangeClassImage image(width, height, classes);
  check_payload(image.data().size() * sizeof(float), bytes.size() - offset, path);
  std::memcpy(image.data().data(), bytes.data() + offset,
              image.data().size() * sizeof(float));
  try {
    image.validate_normalized();
  } catch (const std::invalid_argument& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  return image;
}

std::string format_csv_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CsvWriter::CsvWriter(const std::filesystem::path& path,
                     const std::vector<std::string>& columns)
    : path_(path), columns_(columns.size()) {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns[i];
  }
  buffer_ += '\n';
}

void CsvWriter::row(std::span<const double> values) {
  if (values.size() != columns_) {
    throw std::invalid_argument("csv row width does not match header");
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += format_csv_value(values[i]);
  }
  buffer_ += '\n';
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  std::ofstream out(path_, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create " + path_.string());
  }
  out.write(buffer_.data(), static_cast<std::streamsize>(buffer_.size()));
  if (!out) {
    throw io_error("failed writing " + path_.string());
  }
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
    // destructor must not throw; close() explicitly to observe errors
  }
}

void write_pgm16(const std::filesystem::path& path,
                 std::span<const double> values, int width, int height,
                 double vmin, double vmax) {
  if (values.size() != static_cast<std::size_t>(width) * height) {
    throw std::invalid_argument("pgm value count does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create " + path.string());
  }
  char header[64];
  const int len = std::snprintf(header, sizeof header, "P5\n%d %d\n65535\n",
                                width, height);
  write_bytes(out, header, static_cast<std::size_t>(len), path);

  const double span = vmax > vmin ? vmax - vmin : 1.0;
  std::vector<std::uint8_t> row(static_cast<std::size_t>(width) * 2);
  for (int v = 0; v < height; ++v) {
    for (int u = 0; u < width; ++u) {
      const double x = values[static_cast<std::size_t>(v) * width + u];
      std::uint16_t g = 0;
      if (std::isfinite(x)) {
        double t = (x - vmin) / span;
        t = t < 0.0 ? 0.0 : (t > 1.0 ? 1.0 : t);
        g = static_cast<std::uint16_t>(1 + std::lround(t * 65534.0));
      }
      // PGM 16-bit samples are big-endian.
      row[static_cast<std::size_t>(u) * 2] = static_cast<std::uint8_t>(g >> 8);
      row[static_cast<std::size_t>(u) * 2 + 1] = static_cast<std::uint8_t>(g & 0xff);
    }
    write_bytes(out, row.data(), row.size(), path);
  }

  std::ofstream side(path.string() + ".txt", std::ios::binary | std::ios::trunc);
  if (!side) {
    throw io_error("cannot create " + path.string() + ".txt");
  }
  char text[256];
  std::snprintf(text, sizeof text,
                "min=%.10g\nmax=%.10g\nvalue = min + (gray - 1) / 65534 * (max - min)\n"
                "gray 0 = unobserved\n",
                vmin, vmax);
  side << text;
}

std::uint64_t fnv1a64(std::span<const std::uint8_t> bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t hash_file(const std::filesystem::path& path) {
  const std::string bytes = read_all(path);
  return fnv1a64(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()),
                           bytes.size()));
}

void write_manifest(const RunManifest& manifest, const std::filesystem::path& path) {
  nlohmann::json j;
  j["tool_version"] = manifest.tool_version;
  j["config_path"] = manifest.config_path;
  j["config_hash"] = hex64(manifest.config_hash);
  j["seed"] = manifest.seed;
  j["output_hashes"] = manifest.output_hashes;
  j["timings_ms"] = manifest.timings_ms;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw io_error("cannot create " + path.string());
  }
  out << j.dump(2) << '\n';
}

RunManifest read_manifest(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
      throw io_error("cannot open " + path.string());
    }
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw format_error(path.string() + ": " + e.what());
  }
  RunManifest m;
  m.tool_version = j.value("tool_version", "");
  m.config_path = j.value("config_path", "");
  m.config_hash = std::stoull(j.value("config_hash", "0"), nullptr, 16);
  m.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("output_hashes")) {
    m.output_hashes = j["output_hashes"].get<std::map<std::string, std::string>>();
  }
  if (j.contains("timings_ms")) {
    m.timings_ms = j["timings_ms"].get<std::map<std::string, double>>();
  }
  return m;
}

} // namespace reefmap::io
