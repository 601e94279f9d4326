#include "reefmap/config.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace reefmap::io {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string section;
  std::string key;
  std::string value;
  int line;
};

std::vector<Entry> tokenize(const std::string& text, const std::string& name) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto comment = raw.find_first_of("#;");
    if (comment != std::string::npos) raw = raw.substr(0, comment);
    const std::string s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') {
        throw config_error(name + ":" + std::to_string(line) +
                           ": unterminated section header");
      }
      section = trim(s.substr(1, s.size() - 2));
      if (section.empty()) {
        throw config_error(name + ":" + std::to_string(line) + ": empty section name");
      }
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) {
      throw config_error(name + ":" + std::to_string(line) +
                         ": expected 'key = value'");
    }
    if (section.empty()) {
      throw config_error(name + ":" + std::to_string(line) +
                         ": key outside any section");
    }
    entries.push_back({section, trim(s.substr(0, eq)), trim(s.substr(eq + 1)), line});
  }
  return entries;
}

class Parser {
 public:
  Parser(const Entry& e, const std::string& name) : e_(e), name_(name) {}

  double as_double() const {
    std::size_t pos = 0;
    double v = 0;
    try {
      v = std::stod(e_.value, &pos);
    } catch (const std::exception&) {
      fail("expected a number");
    }
    if (pos != e_.value.size()) fail("expected a number");
    return v;
  }

  int as_int() const {
    const double v = as_double();
    if (v != std::floor(v)) fail("expected an integer");
    return static_cast<int>(v);
  }

  std::uint64_t as_u64() const {
    std::size_t pos = 0;
    std::uint64_t v = 0;
    try {
      v = std::stoull(e_.value, &pos);
    } catch (const std::exception&) {
      fail("expected an unsigned integer");
    }
    if (pos != e_.value.size()) fail("expected an unsigned integer");
    return v;
  }

  bool as_bool() const {
    if (e_.value == "true" || e_.value == "1") return true;
    if (e_.value == "false" || e_.value == "0") return false;
    fail("expected true or false");
    return false;
  }

  std::vector<double> as_list() const {
    std::vector<double> out;
    std::istringstream ss(e_.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      std::size_t pos = 0;
      try {
        out.push_back(std::stod(item, &pos));
      } catch (const std::exception&) {
        fail("expected a comma-separated list of numbers");
      }
      if (pos != item.size()) fail("expected a comma-separated list of numbers");
    }
    if (out.empty()) fail("expected a non-empty list");
    return out;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw config_error(name_ + ":" + std::to_string(e_.line) + ": key '" +
                       e_.key + "': " + what);
  }

 private:
  const Entry& e_;
  const std::string& name_;
};

[[noreturn]] void unknown(const Entry& e, const std::string& name) {
  throw config_error(name + ":" + std::to_string(e.line) + ": unknown key '" +
                     e.key + "' in section [" + e.section + "]");
}

void apply(ScenarioConfig& cfg, const Entry& e, const std::string& name) {
  const Parser p(e, name);
  if (e.section == "world") {
    auto& w = cfg.world;
    if (e.key == "terrain") w.terrain = e.value;
    else if (e.key == "max_range") w.max_range = p.as_double();
    else if (e.key == "level") w.level = p.as_double();
    else if (e.key == "wall_x") w.wall_x = p.as_double();
    else if (e.key == "wall_height") w.wall_height = p.as_double();
    else if (e.key == "wall_base") w.wall_base = p.as_double();
    else if (e.key == "plateau_height") w.plateau_height = p.as_double();
    else if (e.key == "plateau_a_x0") w.plateau_a_x0 = p.as_double();
    else if (e.key == "plateau_a_x1") w.plateau_a_x1 = p.as_double();
    else if (e.key == "plateau_b_x0") w.plateau_b_x0 = p.as_double();
    else if (e.key == "plateau_b_x1") w.plateau_b_x1 = p.as_double();
    else if (e.key == "plateau_y0") w.plateau_y0 = p.as_double();
    else if (e.key == "plateau_y1") w.plateau_y1 = p.as_double();
    else if (e.key == "edge_width") w.edge_width = p.as_double();
    else if (e.key == "gap_depth") w.gap_depth = p.as_double();
    else if (e.key == "amplitude") w.amplitude = p.as_double();
    else if (e.key == "wavelength_x") w.wavelength_x = p.as_double();
    else if (e.key == "wavelength_y") w.wavelength_y = p.as_double();
    else if (e.key == "base") w.base = p.as_double();
    else unknown(e, name);
  } else if (e.section == "trajectory") {
    auto& t = cfg.trajectory;
    if (e.key == "x_start") t.x_start = p.as_double();
    else if (e.key == "x_end") t.x_end = p.as_double();
    else if (e.key == "y") t.y = p.as_double();
    else if (e.key == "elevation") t.elevation = p.as_double();
    else if (e.key == "step") t.step = p.as_double();
    else unknown(e, name);
  } else if (e.section == "camera") {
    auto& c = cfg.camera;
    if (e.key == "width") c.width = p.as_int();
    else if (e.key == "height") c.height = p.as_int();
    else if (e.key == "hfov_deg") c.hfov_deg = p.as_double();
    else if (e.key == "tilt_down_deg") c.tilt_down_deg = p.as_double();
    else unknown(e, name);
  } else if (e.section == "scheme") {
    auto& s = cfg.scheme;
    if (e.key == "min_detection") s.min_detection = p.as_double();
    else if (e.key == "representative_ranges") s.representative_ranges = p.as_list();
    else unknown(e, name);
  } else if (e.section == "degradation") {
    auto& d = cfg.degradation;
    if (e.key == "epsilon") d.epsilon = p.as_double();
    else if (e.key == "smear") d.smear = p.as_int();
    else unknown(e, name);
  } else if (e.section == "map") {
    auto& m = cfg.map;
    if (e.key == "resolution") m.resolution = p.as_double();
    else if (e.key == "side") m.side = p.as_double();
    else unknown(e, name);
  } else if (e.section == "noise") {
    auto& n = cfg.noise;
    if (e.key == "translation_sigma") n.translation_sigma = p.as_double();
    else if (e.key == "rotation_sigma_deg") n.rotation_sigma_deg = p.as_double();
    else if (e.key == "sample") n.sample = p.as_bool();
    else unknown(e, name);
  } else if (e.section == "seed") {
    if (e.key == "value") cfg.seed = p.as_u64();
    else unknown(e, name);
  } else {
    throw config_error(name + ":" + std::to_string(e.line) +
                       ": unknown section [" + e.section + "]");
  }
}

} // namespace

sensor::RangeClassScheme SchemeConfig::build() const {
  sensor::RangeClassScheme s;
  s.min_detection = min_detection;
  s.representative_ranges = representative_ranges;
  s.bin_edges.push_back(min_detection);
  for (std::size_t i = 0; i + 1 < representative_ranges.size(); ++i) {
    s.bin_edges.push_back(representative_ranges[i]);
  }
  s.bin_edges.push_back(std::numeric_limits<double>::infinity());
  s.validate();
  return s;
}

void ScenarioConfig::validate() const {
  const auto bad = [](const std::string& field, const std::string& why) {
    throw config_error("config field '" + field + "' " + why);
  };
  for (const auto& [name, value] :
       std::initializer_list<std::pair<const char*, double>>{
           {"world.level", world.level},
           {"world.wall_x", world.wall_x},
           {"world.wall_height", world.wall_height},
           {"world.wall_base", world.wall_base},
           {"world.plateau_height", world.plateau_height},
           {"world.plateau_a_x0", world.plateau_a_x0},
           {"world.plateau_a_x1", world.plateau_a_x1},
           {"world.plateau_b_x0", world.plateau_b_x0},
           {"world.plateau_b_x1", world.plateau_b_x1},
           {"world.plateau_y0", world.plateau_y0},
           {"world.plateau_y1", world.plateau_y1},
           {"world.edge_width", world.edge_width},
           {"world.gap_depth", world.gap_depth},
           {"world.amplitude", world.amplitude},
           {"world.wavelength_x", world.wavelength_x},
           {"world.wavelength_y", world.wavelength_y},
           {"world.base", world.base},
           {"world.max_range", world.max_range},
           {"trajectory.x_start", trajectory.x_start},
           {"trajectory.x_end", trajectory.x_end},
           {"trajectory.y", trajectory.y},
           {"trajectory.elevation", trajectory.elevation},
           {"trajectory.step", trajectory.step},
           {"camera.hfov_deg", camera.hfov_deg},
           {"camera.tilt_down_deg", camera.tilt_down_deg},
           {"scheme.min_detection", scheme.min_detection},
           {"degradation.epsilon", degradation.epsilon},
           {"map.resolution", map.resolution},
           {"map.side", map.side},
           {"noise.translation_sigma", noise.translation_sigma},
           {"noise.rotation_sigma_deg", noise.rotation_sigma_deg}}) {
    if (!std::isfinite(value)) bad(name, "must be finite");
  }
  for (double r : scheme.representative_ranges) {
    if (!std::isfinite(r)) bad("scheme.representative_ranges", "must be finite");
  }
  if (!(map.resolution > 0.0)) bad("map.resolution", "must be > 0");
  if (!(map.side > 0.0)) bad("map.side", "must be > 0");
  if (map.side / map.resolution > 4096.0) bad("map.side", "yields too many cells");
  if (!(trajectory.step > 0.0)) bad("trajectory.step", "must be > 0");
  if (trajectory.x_end < trajectory.x_start) {
    bad("trajectory.x_end", "must be >= x_start");
  }
  if (camera.width <= 0 || camera.height <= 0) {
    bad("camera.width/height", "must be positive");
  }
  if (!(camera.hfov_deg > 0.0) || camera.hfov_deg >= 180.0) {
    bad("camera.hfov_deg", "must be in (0, 180)");
  }
  if (degradation.epsilon < 0.0 || degradation.epsilon > 1.0) {
    bad("degradation.epsilon", "must be in [0, 1]");
  }
  if (degradation.smear < 0) bad("degradation.smear", "must be >= 0");
  if (!(world.max_range > 0.0)) bad("world.max_range", "must be > 0");
  if (noise.translation_sigma < 0.0) bad("noise.translation_sigma", "must be >= 0");
  if (noise.rotation_sigma_deg < 0.0) bad("noise.rotation_sigma_deg", "must be >= 0");
  if (world.terrain != "flat" && world.terrain != "wall" &&
      world.terrain != "plateau_gap" && world.terrain != "undulating") {
    bad("world.terrain", "must be flat, wall, plateau_gap or undulating");
  }
  try {
    scheme.build();
  } catch (const std::invalid_argument& e) {
    throw config_error(std::string("config field 'scheme': ") + e.what());
  }
}

ScenarioConfig parse_config(const std::string& text, const std::string& name) {
  ScenarioConfig cfg;
  for (const Entry& e : tokenize(text, name)) {
    apply(cfg, e, name);
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig read_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw config_error("cannot open config " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.filename().string());
}

} // namespace reefmap::io
