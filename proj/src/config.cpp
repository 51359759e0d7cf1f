#include "ghostsim/config.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>

#include "ghostsim/error.hpp"

namespace ghostsim {

namespace {

enum class Kind { length, duration, real, integer, boolean, text, real_list, method, object };

struct Key {
  const char* section;
  const char* name;
  Kind kind;
  std::function<void*(ScenarioConfig&)> slot;
};

#define GS_KEY(sec, name, kind, expr) \
  Key { sec, name, kind, [](ScenarioConfig& c) -> void* { return static_cast<void*>(&(expr)); } }

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      GS_KEY("grid", "nx", Kind::integer, c.nx),
      GS_KEY("grid", "ny", Kind::integer, c.ny),
      GS_KEY("grid", "dx", Kind::length, c.dx),
      GS_KEY("grid", "dy", Kind::length, c.dy),
      GS_KEY("grid", "wavelength", Kind::length, c.wavelength),

      GS_KEY("source", "method", Kind::method, c.source.method),
      GS_KEY("source", "l_c", Kind::length, c.source.correlation_length),
      GS_KEY("source", "mean_intensity", Kind::real, c.source.mean_intensity),
      GS_KEY("source", "tau_c", Kind::duration, c.source.correlation_time),
      GS_KEY("source", "beam_radius", Kind::length, c.source.beam_radius),
      GS_KEY("source", "screen_l", Kind::length, c.source.diffuser.screen_correlation_length),
      GS_KEY("source", "phase_rms", Kind::real, c.source.diffuser.phase_rms),
      GS_KEY("source", "diffuser_distance", Kind::length, c.source.diffuser.distance),

      GS_KEY("ensemble", "realizations", Kind::integer, c.realizations),
      GS_KEY("ensemble", "seed", Kind::integer, c.seed),
      GS_KEY("ensemble", "workers", Kind::integer, c.workers),

      GS_KEY("arms", "z_object", Kind::length, c.z_object),
      GS_KEY("arms", "z_reference", Kind::length, c.z_reference),

      GS_KEY("lens", "enabled", Kind::boolean, c.lens_enabled),
      GS_KEY("lens", "f", Kind::length, c.focal_length),
      GS_KEY("lens", "aperture", Kind::length, c.lens_aperture),
      GS_KEY("lens", "magnifications", Kind::real_list, c.magnifications),

      GS_KEY("object", "kind", Kind::object, c.object),
      GS_KEY("object", "y1", Kind::length, c.y1),
      GS_KEY("object", "y2", Kind::length, c.y2),
      GS_KEY("object", "hole_side", Kind::length, c.hole_side),
      GS_KEY("object", "hole_pitch", Kind::length, c.hole_pitch),

      GS_KEY("detector", "side", Kind::length, c.detector_side),
      GS_KEY("detector", "scan_start", Kind::length, c.scan_start),
      GS_KEY("detector", "scan_stop", Kind::length, c.scan_stop),
      GS_KEY("detector", "scan_step", Kind::length, c.scan_step),
      GS_KEY("detector", "scan_y", Kind::length, c.scan_y),

      GS_KEY("analysis", "guard_fraction", Kind::real, c.guard_fraction),
      GS_KEY("analysis", "background_margin", Kind::real, c.background_margin),
      GS_KEY("analysis", "ratios", Kind::real_list, c.ratios),
      GS_KEY("analysis", "z_over_rayleigh", Kind::real_list, c.z_over_rayleigh),
      GS_KEY("analysis", "side_multiples", Kind::real_list, c.side_multiples),
      GS_KEY("analysis", "metric_frames", Kind::integer, c.metric_frames),

      GS_KEY("output", "dir", Kind::text, c.output_dir),
      GS_KEY("output", "dump_frames", Kind::integer, c.dump_frames),
  };
  return table;
}

#undef GS_KEY

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Unit {
  std::string_view suffix;
  double divisor;  // value / divisor, exact for powers of ten
};

constexpr std::array<Unit, 6> kLengthUnits{{
    {"m", 1.0}, {"cm", 1e2}, {"mm", 1e3}, {"um", 1e6}, {"\xC2\xB5m", 1e6}, {"nm", 1e9}}};
constexpr std::array<Unit, 5> kTimeUnits{{
    {"s", 1.0}, {"ms", 1e3}, {"us", 1e6}, {"\xC2\xB5s", 1e6}, {"ns", 1e9}}};

template <std::size_t N>
double parse_with_units(std::string_view text, const std::array<Unit, N>& units, const char* what) {
  text = trim(text);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr == begin) {
    throw ConfigError("cannot parse " + std::string(what) + " '" + std::string(text) + "'", 0);
  }
  const std::string_view suffix = trim(std::string_view(ptr, static_cast<std::size_t>(end - ptr)));
  if (suffix.empty()) {
    throw ConfigError("missing unit on " + std::string(what) + " '" + std::string(text) + "'", 0);
  }
  for (const auto& u : units) {
    if (u.suffix == suffix) {
      if (!std::isfinite(value)) {
        throw ConfigError("non-finite " + std::string(what) + " '" + std::string(text) + "'", 0);
      }
      return value / u.divisor;
    }
  }
  throw ConfigError("unknown unit '" + std::string(suffix) + "' on " + std::string(what), 0);
}

double parse_real(std::string_view text) {
  text = trim(text);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty() || !std::isfinite(value)) {
    throw ConfigError("expected a number, got '" + std::string(text) + "'", 0);
  }
  return value;
}

template <typename Int>
Int parse_integer(std::string_view text) {
  text = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) {
    throw ConfigError("expected an integer, got '" + std::string(text) + "'", 0);
  }
  return value;
}

std::vector<double> parse_list(std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    out.push_back(parse_real(text.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                                 : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

void assign(const Key& key, ScenarioConfig& config, std::string_view value) {
  void* slot = key.slot(config);
  const std::string name = key.name;
  switch (key.kind) {
    case Kind::length:
      *static_cast<double*>(slot) = parse_with_units(value, kLengthUnits, key.name);
      break;
    case Kind::duration:
      *static_cast<double*>(slot) = parse_with_units(value, kTimeUnits, key.name);
      break;
    case Kind::real:
      *static_cast<double*>(slot) = parse_real(value);
      break;
    case Kind::integer:
      if (name == "nx" || name == "ny") {
        *static_cast<std::int64_t*>(slot) = parse_integer<std::int64_t>(value);
      } else {
        *static_cast<std::uint64_t*>(slot) = parse_integer<std::uint64_t>(value);
      }
      break;
    case Kind::boolean: {
      const auto v = trim(value);
      if (v == "true" || v == "yes" || v == "on") {
        *static_cast<bool*>(slot) = true;
      } else if (v == "false" || v == "no" || v == "off") {
        *static_cast<bool*>(slot) = false;
      } else {
        throw ConfigError("expected true or false, got '" + std::string(v) + "'", 0);
      }
      break;
    }
    case Kind::text:
      *static_cast<std::string*>(slot) = std::string(trim(value));
      break;
    case Kind::real_list:
      *static_cast<std::vector<double>*>(slot) = parse_list(value);
      break;
    case Kind::method:
      try {
        *static_cast<SpeckleMethod*>(slot) = parse_speckle_method(trim(value));
      } catch (const ValidationError& e) {
        throw ConfigError(e.what(), 0);
      }
      break;
    case Kind::object:
      try {
        *static_cast<ObjectKind*>(slot) = parse_object_kind(trim(value));
      } catch (const ValidationError& e) {
        throw ConfigError(e.what(), 0);
      }
      break;
  }
}

std::string render(const Key& key, ScenarioConfig& config) {
  void* slot = key.slot(config);
  switch (key.kind) {
    case Kind::length:
      return format_double(*static_cast<double*>(slot)) + "m";
    case Kind::duration:
      return format_double(*static_cast<double*>(slot)) + "s";
    case Kind::real:
      return format_double(*static_cast<double*>(slot));
    case Kind::integer:
      if (std::string_view(key.name) == "nx" || std::string_view(key.name) == "ny") {
        return std::to_string(*static_cast<std::int64_t*>(slot));
      }
      return std::to_string(*static_cast<std::uint64_t*>(slot));
    case Kind::boolean:
      return *static_cast<bool*>(slot) ? "true" : "false";
    case Kind::text:
      return *static_cast<std::string*>(slot);
    case Kind::real_list: {
      std::string out;
      for (double v : *static_cast<std::vector<double>*>(slot)) {
        if (!out.empty()) out += ", ";
        out += format_double(v);
      }
      return out;
    }
    case Kind::method:
      return std::string(to_string(*static_cast<SpeckleMethod*>(slot)));
    case Kind::object:
      return std::string(to_string(*static_cast<ObjectKind*>(slot)));
  }
  return {};
}

}  // namespace

ObjectKind parse_object_kind(std::string_view name) {
  if (name == "none") return ObjectKind::none;
  if (name == "pinhole") return ObjectKind::pinhole;
  if (name == "two_hole") return ObjectKind::two_hole;
  if (name == "hole_array") return ObjectKind::hole_array;
  throw ValidationError("object kind: unknown '" + std::string(name) +
                        "' (expected none, pinhole, two_hole or hole_array)");
}

std::string_view to_string(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::none: return "none";
    case ObjectKind::pinhole: return "pinhole";
    case ObjectKind::two_hole: return "two_hole";
    case ObjectKind::hole_array: return "hole_array";
  }
  return "none";
}

Grid2D ScenarioConfig::grid() const { return make_grid(nx, ny, dx, dy, wavelength); }

std::vector<double> ScenarioConfig::scan_positions() const {
  if (!(scan_step > 0.0) || !std::isfinite(scan_step)) {
    throw ValidationError("detector.scan_step: must be positive");
  }
  if (!(scan_stop >= scan_start)) {
    throw ValidationError("detector.scan_stop: must not be below scan_start");
  }
  const double span = (scan_stop - scan_start) / scan_step;
  const auto count = static_cast<std::size_t>(std::floor(span + 1e-9)) + 1;
  if (count > 1'000'000) throw ValidationError("detector: too many scan positions");
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = scan_start + static_cast<double>(k) * scan_step;
  return out;
}

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), ptr);
}

double parse_length(std::string_view text) { return parse_with_units(text, kLengthUnits, "length"); }

double parse_duration(std::string_view text) { return parse_with_units(text, kTimeUnits, "duration"); }

ScenarioConfig parse_config_text(std::string_view text, const ScenarioConfig& defaults) {
  ScenarioConfig config = defaults;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("unterminated section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      bool known = false;
      for (const auto& k : keys()) known = known || section == k.section;
      if (!known) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    const std::string name(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    if (name.empty()) throw ConfigError("missing key before '='", line_no);
    if (section.empty()) throw ConfigError("key '" + name + "' outside any section", line_no);

    const Key* match = nullptr;
    for (const auto& k : keys()) {
      if (section == k.section && name == k.name) match = &k;
    }
    if (match == nullptr) throw ConfigError("unknown key '" + name + "' in [" + section + "]", line_no);
    try {
      assign(*match, config, value);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(section) + "." + name + ": " + e.what(), line_no);
    }
  }
  return config;
}

ScenarioConfig parse_config(const std::filesystem::path& path, const ScenarioConfig& defaults) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file " + path.string());
  return parse_config_text(buffer.str(), defaults);
}

std::string write_config(const ScenarioConfig& config, bool run_settings) {
  ScenarioConfig copy = config;
  std::string out;
  std::string section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out += "\n";
      section = k.section;
      out += "[" + section + "]\n";
    }
    const std::string_view name = k.name;
    if (!run_settings && (name == "workers" || (section == "output" && name == "dir"))) continue;
    out += std::string(k.name) + " = " + render(k, copy) + "\n";
  }
  return out;
}

}  // namespace ghostsim
