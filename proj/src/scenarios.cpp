#include "ghostsim/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <mutex>

#include "ghostsim/detect.hpp"
#include "ghostsim/ensemble.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/cell_model.hpp"
#include "ghostsim/optics.hpp"
#include "ghostsim/speckle.hpp"

namespace ghostsim {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

EnsembleOptions ensemble_options(const ScenarioConfig& c) {
  EnsembleOptions options;
  options.workers = static_cast<unsigned>(std::min<std::uint64_t>(c.workers, 1024));
  return options;
}

std::optional<double> aperture(const ScenarioConfig& c) {
  if (c.lens_aperture > 0.0) return c.lens_aperture;
  return std::nullopt;
}

/// Physical side of the snapped detector window along x.
double window_side(const Grid2D& grid, double side) {
  return static_cast<double>(snapped_side_pixels(side, grid.dx, grid.nx)) * grid.dx;
}

double window_area(const Grid2D& grid, double side) {
  return static_cast<double>(snapped_side_pixels(side, grid.dx, grid.nx)) * grid.dx *
         static_cast<double>(snapped_side_pixels(side, grid.dy, grid.ny)) * grid.dy;
}

std::size_t nearest_index(const std::vector<double>& positions, double x, double step, const char* what) {
  std::size_t best = 0;
  for (std::size_t k = 1; k < positions.size(); ++k) {
    if (std::abs(positions[k] - x) < std::abs(positions[best] - x)) best = k;
  }
  if (positions.empty() || std::abs(positions[best] - x) > 0.5 * step * (1.0 + 1e-9)) {
    throw ValidationError(std::string("scan does not cover the ") + what + " at x = " + format_double(x) + " m");
  }
  return best;
}

/// Scan positions whose detector window is farther than `exclusion` (Chebyshev)
/// from every open point of the object.
std::vector<std::size_t> background_region(const std::vector<double>& positions, double scan_y,
                                           const std::vector<std::pair<double, double>>& points,
                                           double half_window, double exclusion) {
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < positions.size(); ++k) {
    bool far = true;
    for (const auto& [px, py] : points) {
      const double d = std::max(std::abs(positions[k] - px), std::abs(scan_y - py)) - half_window;
      if (!(d > exclusion)) {
        far = false;
        break;
      }
    }
    if (far) out.push_back(k);
  }
  if (out.empty()) {
    throw ValidationError("analysis: no scan position lies in the background region; widen the scan");
  }
  return out;
}

/// Guard-fraction rule for enveloped sources after free propagation over `z`,
/// optionally magnified by `magnification`.
void check_guard(const ScenarioConfig& c, const Grid2D& grid, double z, double magnification = 1.0) {
  if (!(c.guard_fraction > 0.0 && c.guard_fraction <= 1.0)) {
    throw ValidationError("analysis.guard_fraction: must be in (0, 1]");
  }
  if (c.source.beam_radius <= 0.0) return;  // stationary periodic field: wraparound is exact
  const double diameter = 2.0 * c.source.beam_radius * beam_expansion(c.source, grid.wavelength, z) *
                          std::abs(magnification);
  const double limit = c.guard_fraction * std::min(grid.extent_x(), grid.extent_y());
  if (diameter > limit) {
    throw ValidationError("windowing: beam diameter " + format_double(diameter) + " m at z = " + format_double(z) +
                          " m exceeds the guard fraction (" + format_double(limit) + " m) of the grid");
  }
}

void require_equal_arms(const ScenarioConfig& c, const char* scenario) {
  if (c.z_object != c.z_reference) {
    throw ValidationError(std::string(scenario) + ": arms.z_object and arms.z_reference must be equal");
  }
}

void require_small_holes(const ScenarioConfig& c) {
  if (!(c.hole_side < c.source.correlation_length)) {
    throw ValidationError("object.hole_side: " + format_double(c.hole_side) +
                          " m is not small compared to l_c = " + format_double(c.source.correlation_length) + " m");
  }
}

void require_separated_holes(const ScenarioConfig& c) {
  if (!(std::abs(c.y1 - c.y2) > c.source.correlation_length)) {
    throw ValidationError("object: |y1 - y2| must exceed l_c");
  }
}

double coherence_scale(const ScenarioConfig& c, double z) {
  if (c.source.beam_radius <= 0.0) return c.source.correlation_length;
  return c.source.correlation_length * std::max(1.0, beam_expansion(c.source, c.wavelength, z));
}

/// First `count` reference-arm intensity frames of channel 0.
std::vector<IntensityMap> dump_frames(const SpeckleSource& source, const Apparatus& apparatus,
                                      const ScenarioConfig& c) {
  std::vector<IntensityMap> frames;
  if (c.dump_frames == 0) return frames;
  auto ws = apparatus.make_workspace(true);
  std::vector<RealizationRecord> records;
  const std::size_t arm = apparatus.channel(0).reference_arm;
  for (std::uint64_t r = 0; r < c.dump_frames; ++r) {
    apparatus.measure(source, r, c.seed, ws, records);
    const auto& buf = ws.arm_field(arm);
    IntensityMap map{apparatus.grid(), std::vector<double>(buf.size())};
    for (std::size_t k = 0; k < buf.size(); ++k) map.values[k] = std::norm(buf[k]);
    frames.push_back(std::move(map));
  }
  return frames;
}

DataTable contrast_table(const ContrastReport& r, double ratio) {
  return DataTable{"contrast.csv",
                   {"A_over_a", "S_measured", "S_predicted", "stderr"},
                   {{ratio, r.s_measured, r.s_predicted, r.s_stderr}}};
}

void finish(ScenarioResult& result, const CorrelationMap& map, Clock::time_point start) {
  result.ghost_image = ghost_image(map);
  result.tables.insert(result.tables.begin(), correlation_table(map));
  result.correlation = map;
  result.verdict.runtime_seconds = seconds_since(start);
}

ScenarioResult begin(const char* name, const ScenarioConfig& c, std::string mode) {
  ScenarioResult result;
  result.config = c;
  result.verdict.scenario = name;
  result.verdict.mode = std::move(mode);
  result.verdict.seed = c.seed;
  return result;
}

/// Depth of the dip between the two holes relative to the smaller peak.
struct Resolvability {
  double ratio = kNaN;
  double threshold = kNaN;  // max(0.2, 3 standard errors of the depth)
};

Resolvability resolvability(const CorrelationMap& map, std::size_t i1, std::size_t i2) {
  if (i1 > i2) std::swap(i1, i2);
  Resolvability out;
  if (i2 - i1 < 2) return out;
  const std::size_t lo_peak = map.covariance[i1] <= map.covariance[i2] ? i1 : i2;
  std::size_t dip = i1 + 1;
  for (std::size_t k = i1 + 1; k < i2; ++k) {
    if (map.covariance[k] < map.covariance[dip]) dip = k;
  }
  const double peak = map.covariance[lo_peak];
  const double depth = peak - map.covariance[dip];
  out.ratio = depth / peak;
  const double se = std::hypot(map.covariance_stderr[lo_peak], map.covariance_stderr[dip]);
  out.threshold = std::max(0.2, 3.0 * se / peak);
  return out;
}

}  // namespace

Check make_check(std::string name, double measured, double expected, double lower, double upper) {
  return Check{std::move(name), measured, expected, lower, upper,
               !std::isnan(measured) && measured >= lower && measured <= upper};
}

bool ScenarioVerdict::passed() const noexcept {
  return !checks.empty() &&
         std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

std::string ScenarioVerdict::table() const {
  std::string out = "scenario: " + scenario + "\nmode: " + mode + "\nseed: " + std::to_string(seed) + "\n\n";
  char line[256];
  std::snprintf(line, sizeof line, "%-34s %14s %14s %14s %14s  %s\n", "check", "measured", "expected", "lower",
                "upper", "result");
  out += line;
  for (const auto& c : checks) {
    std::snprintf(line, sizeof line, "%-34s %14.6g %14.6g %14.6g %14.6g  %s\n", c.name.c_str(), c.measured,
                  c.expected, c.lower, c.upper, c.passed ? "PASS" : "FAIL");
    out += line;
  }
  out += std::string("\noverall: ") + (passed() ? "PASS" : "FAIL") + "\n";
  return out;
}

std::vector<double> find_peaks(const std::vector<double>& values, const std::vector<double>& positions,
                               double fraction) {
  if (values.size() != positions.size()) throw ValidationError("find_peaks: size mismatch");
  std::vector<double> peaks;
  if (values.size() < 3) return peaks;
  double top = -kInf;
  for (double v : values) {
    if (std::isfinite(v)) top = std::max(top, v);
  }
  if (!(top > 0.0)) return peaks;
  const double step = positions[1] - positions[0];
  for (std::size_t k = 1; k + 1 < values.size(); ++k) {
    const double a = values[k - 1], b = values[k], c = values[k + 1];
    if (!(b >= fraction * top) || !(b > a) || !(b >= c)) continue;
    const double curvature = a - 2.0 * b + c;
    double offset = curvature < 0.0 ? 0.5 * (a - c) / curvature : 0.0;
    offset = std::clamp(offset, -0.5, 0.5);
    peaks.push_back(positions[k] + offset * step);
  }
  return peaks;
}

ScenarioConfig default_config(std::string_view scenario) {
  ScenarioConfig c;
  if (scenario == "equal_plane") {
    c.object = ObjectKind::pinhole;
  } else if (scenario == "two_hole") {
    c.object = ObjectKind::two_hole;
  } else if (scenario == "contrast_sweep") {
    c.object = ObjectKind::hole_array;
  } else if (scenario == "lens_ghost") {
    c.object = ObjectKind::two_hole;
    c.z_object = 0.0;
    c.z_reference = 0.0;
    c.lens_enabled = true;
    c.lens_aperture = 1.8e-3;
    c.y1 = -0.25e-3;
    c.y2 = 0.25e-3;
    c.realizations = 6000;
  } else if (scenario == "near_to_far") {
    c.object = ObjectKind::pinhole;
    c.source.beam_radius = 0.12e-3;
    c.realizations = 5000;
    c.scan_start = -0.3e-3;
    c.scan_stop = 0.3e-3;
  } else if (scenario == "resolution_tradeoff") {
    c.object = ObjectKind::two_hole;
    c.y1 = -100e-6;
    c.y2 = 100e-6;
    c.scan_start = -0.9e-3;
    c.scan_stop = 0.9e-3;
  } else {
    std::string names;
    for (const auto& n : scenario_names()) names += (names.empty() ? "" : ", ") + n;
    throw ValidationError("unknown scenario '" + std::string(scenario) + "'; registered: " + names);
  }
  c.output_dir = "out/" + std::string(scenario);
  return c;
}

ScenarioResult run_equal_plane(const ScenarioConfig& c) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::none && c.object != ObjectKind::pinhole) {
    throw ValidationError("equal_plane: takes no object (object.kind must be none or pinhole)");
  }
  const bool matched = c.z_object == c.z_reference;
  auto result = begin("equal_plane", c, matched ? "matched" : "mismatch");
  const Grid2D grid = c.grid();
  check_guard(c, grid, std::max(c.z_object, c.z_reference));
  const SpeckleSource source(grid, c.source);
  const auto positions = c.scan_positions();

  // The object arm ends on a pinhole matching the detector window, so the
  // bucket reads the intensity at the equivalent point x0 = 0.
  const double x0 = 0.0;
  const double side = window_side(grid, c.detector_side);
  const RectHole pinhole[] = {{x0, c.scan_y, side, side}};
  const auto mask = make_rect_mask(grid, pinhole);
  const auto object_arm = OpticalChain::free_space(c.z_object);
  const auto reference_arm = OpticalChain::free_space(c.z_reference);
  const PointDetectorSpec detector{c.detector_side, positions, c.scan_y};

  // (i) copy equality through identical chains
  const auto [e1, e2] = beam_splitter(source.generate(0, c.seed));
  const double diff = max_abs_difference(apply_chain(e1, object_arm), apply_chain(e2, object_arm));
  result.verdict.checks.push_back(make_check("copy_equality_max_abs_diff", diff, 0.0, 0.0, 0.0));

  const Apparatus apparatus(grid, {object_arm, reference_arm}, {mask}, {detector}, {{0, 0, 1, 0}});
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));
  const auto map = finalize(accs[0], positions);

  const double step = c.scan_step;
  const std::size_t i0 = nearest_index(positions, x0, step, "equivalent point");
  const double far = 10.0 * coherence_scale(c, c.z_reference);
  std::size_t ifar = positions.size();
  for (std::size_t k = 0; k < positions.size(); ++k) {
    if (positions[k] - x0 >= far - 1e-12) {
      ifar = k;
      break;
    }
  }
  if (ifar == positions.size()) {
    for (std::size_t k = positions.size(); k-- > 0;) {
      if (x0 - positions[k] >= far - 1e-12) {
        ifar = k;
        break;
      }
    }
  }
  if (ifar == positions.size()) throw ValidationError("equal_plane: scan does not reach 10 l_c from x0");

  if (matched) {
    result.verdict.checks.push_back(make_check("g2_equivalent_point", map.g2[i0], 2.0, 1.95, 2.05));
  } else {
    result.verdict.checks.push_back(
        make_check("g2_equivalent_point_decorrelated", map.g2[i0], 2.0, -kInf, 2.0 - 3.0 * map.g2_stderr[i0]));
  }
  result.verdict.checks.push_back(make_check("g2_at_10_l_c", map.g2[ifar], 1.0, 0.97, 1.03));

  DataTable sep{"g2_vs_separation.csv", {"separation_m", "g2", "stderr"}, {}};
  for (std::size_t k = 0; k < positions.size(); ++k) sep.rows.push_back({positions[k] - x0, map.g2[k], map.g2_stderr[k]});
  result.tables.push_back(std::move(sep));
  result.frames = dump_frames(source, apparatus, c);
  finish(result, map, start);
  return result;
}

ScenarioResult run_two_hole_ghost(const ScenarioConfig& c) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::two_hole) throw ValidationError("two_hole: object.kind must be two_hole");
  require_small_holes(c);
  require_separated_holes(c);
  require_equal_arms(c, "two_hole");
  auto result = begin("two_hole", c, "matched");
  const Grid2D grid = c.grid();
  check_guard(c, grid, c.z_object);
  const SpeckleSource source(grid, c.source);
  const auto positions = c.scan_positions();

  const RectHole holes[] = {{c.y1, c.scan_y, c.hole_side, c.hole_side}, {c.y2, c.scan_y, c.hole_side, c.hole_side}};
  const auto mask = make_rect_mask(grid, holes);
  const PointDetectorSpec detector{c.detector_side, positions, c.scan_y};
  const Apparatus apparatus(grid, {OpticalChain::free_space(c.z_object)}, {mask}, {detector}, {{0, 0, 0, 0}});
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));
  const auto map = finalize(accs[0], positions);
  const auto image = ghost_image(map);

  const auto peaks = find_peaks(image, positions);
  result.verdict.checks.push_back(make_check("peak_count", static_cast<double>(peaks.size()), 2.0, 2.0, 2.0));
  const double lo = std::min(c.y1, c.y2), hi = std::max(c.y1, c.y2);
  const double p_lo = peaks.size() == 2 ? peaks[0] : kNaN;
  const double p_hi = peaks.size() == 2 ? peaks[1] : kNaN;
  result.verdict.checks.push_back(make_check("peak_position_lower", p_lo, lo, lo - grid.dx, lo + grid.dx));
  result.verdict.checks.push_back(make_check("peak_position_upper", p_hi, hi, hi - grid.dx, hi + grid.dx));

  std::vector<std::size_t> signal = {nearest_index(positions, lo, c.scan_step, "hole"),
                                     nearest_index(positions, hi, c.scan_step, "hole")};
  const auto background = background_region(positions, c.scan_y, mask.open_points(),
                                            0.5 * window_side(grid, c.detector_side),
                                            c.background_margin * coherence_scale(c, c.z_object));
  const double a = window_area(grid, c.detector_side);
  const auto report = measured_contrast(map, signal, background, mask.open_area(), a);
  result.verdict.checks.push_back(make_check("signal_to_background", report.s_measured, 1.5, 1.4, 1.6));

  result.tables.push_back(contrast_table(report, mask.open_area() / a));
  result.tables.push_back(DataTable{"peaks.csv", {"peak_m", "expected_m"}, {{p_lo, lo}, {p_hi, hi}}});
  result.frames = dump_frames(source, apparatus, c);
  finish(result, map, start);
  return result;
}

ScenarioResult run_contrast_sweep(const ScenarioConfig& c) { return run_contrast_sweep(c, c.ratios); }

ScenarioResult run_contrast_sweep(const ScenarioConfig& c, const std::vector<double>& ratios) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::hole_array) throw ValidationError("contrast_sweep: object.kind must be hole_array");
  if (ratios.empty()) throw ValidationError("contrast_sweep: no ratios given");
  require_small_holes(c);
  require_equal_arms(c, "contrast_sweep");
  if (!(c.hole_pitch >= 2.0 * c.source.correlation_length)) {
    throw ValidationError("object.hole_pitch: holes closer than 2 l_c are not independent speckle cells");
  }
  auto result = begin("contrast_sweep", c, "matched");
  const Grid2D grid = c.grid();
  check_guard(c, grid, c.z_object);
  const SpeckleSource source(grid, c.source);
  const auto positions = c.scan_positions();

  // N holes on a square lattice, four per row; rows alternate around the scan row.
  constexpr std::size_t kPerRow = 4;
  std::vector<ApertureMask> masks;
  std::vector<std::uint64_t> cells;
  for (double r : ratios) {
    if (!(r >= 1.0) || r != std::round(r) || r > 4096.0) {
      throw ValidationError("contrast_sweep: ratio " + format_double(r) +
                            " is not realizable as a whole number of speckle cells");
    }
    const auto n = static_cast<std::size_t>(r);
    std::vector<RectHole> holes;
    for (std::size_t k = 0; k < n; ++k) {
      const std::size_t row = k / kPerRow;
      const std::size_t in_row = std::min(kPerRow, n - row * kPerRow);
      const double col = static_cast<double>(k % kPerRow) - 0.5 * static_cast<double>(in_row - 1);
      const double row_offset = row == 0 ? 0.0 : (row % 2 == 1 ? 1.0 : -1.0) * static_cast<double>((row + 1) / 2);
      holes.push_back({col * c.hole_pitch, c.scan_y + row_offset * c.hole_pitch, c.hole_side, c.hole_side});
    }
    try {
      masks.push_back(make_rect_mask(grid, holes));
    } catch (const ValidationError& e) {
      throw ValidationError("contrast_sweep: ratio " + format_double(r) + " does not fit on the grid: " + e.what());
    }
    cells.push_back(n);
  }

  const PointDetectorSpec detector{c.detector_side, positions, c.scan_y};
  std::vector<Apparatus::Channel> channels;
  for (std::size_t m = 0; m < masks.size(); ++m) channels.push_back({0, m, 0, 0});
  const Apparatus apparatus(grid, {OpticalChain::free_space(c.z_object)}, masks, {detector}, channels);
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));

  const double a = window_area(grid, c.detector_side);
  const double half = 0.5 * window_side(grid, c.detector_side);
  const double exclusion = c.background_margin * coherence_scale(c, c.z_object);
  DataTable table{"contrast_sweep.csv",
                  {"A_over_a", "S_measured", "S_predicted", "stderr", "S_cell_model", "cell_model_stderr",
                   "object_area_m2", "detector_area_m2"},
                  {}};
  std::optional<CorrelationMap> first;
  for (std::size_t m = 0; m < masks.size(); ++m) {
    const auto map = finalize(accs[m], positions);
    std::vector<std::size_t> signal;
    const auto points = masks[m].open_points();
    for (const auto& [px, py] : points) {
      if (std::abs(py - c.scan_y) < 0.5 * grid.dy) signal.push_back(nearest_index(positions, px, c.scan_step, "hole"));
    }
    std::sort(signal.begin(), signal.end());
    signal.erase(std::unique(signal.begin(), signal.end()), signal.end());
    const auto background = background_region(positions, c.scan_y, points, half, exclusion);
    // Effective A/a counts independent speckle cells, one per hole.
    const double n = static_cast<double>(cells[m]);
    const auto report = measured_contrast(map, signal, background, n * a, a);
    const auto cell = cell_model_contrast(cells[m], 10 * c.realizations, c.seed + 0x5bd1e995u);

    const std::string tag = format_double(n);
    result.verdict.checks.push_back(make_check("S_at_A_over_a_" + tag, report.s_measured, report.s_predicted,
                                               0.95 * report.s_predicted, 1.05 * report.s_predicted));
    const double joint = std::hypot(report.s_stderr, cell.contrast_stderr);
    result.verdict.checks.push_back(make_check("cell_model_agreement_" + tag, report.s_measured - cell.contrast,
                                               0.0, -3.0 * joint, 3.0 * joint));
    table.rows.push_back({n, report.s_measured, report.s_predicted, report.s_stderr, cell.contrast,
                          cell.contrast_stderr, masks[m].open_area(), a});
    if (!first) first = map;
  }
  result.tables.push_back(std::move(table));
  result.frames = dump_frames(source, apparatus, c);
  finish(result, *first, start);
  return result;
}

ScenarioResult run_lens_ghost(const ScenarioConfig& c) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::two_hole) throw ValidationError("lens_ghost: object.kind must be two_hole");
  require_small_holes(c);
  require_separated_holes(c);
  const bool matched = c.z_object == c.z_reference;
  const std::string mode = c.lens_enabled ? (matched ? "imaging" : "imaging_mismatch")
                                          : (matched ? "matched_no_lens" : "mismatch");
  auto result = begin("lens_ghost", c, mode);
  const Grid2D grid = c.grid();
  const SpeckleSource source(grid, c.source);
  const auto positions = c.scan_positions();

  const RectHole holes[] = {{c.y1, c.scan_y, c.hole_side, c.hole_side}, {c.y2, c.scan_y, c.hole_side, c.hole_side}};
  const auto mask = make_rect_mask(grid, holes);
  const PointDetectorSpec detector{c.detector_side, positions, c.scan_y};
  check_guard(c, grid, c.z_object);

  std::vector<OpticalChain> arms{OpticalChain::free_space(c.z_object)};
  std::vector<Apparatus::Channel> channels;
  std::vector<double> mags;
  std::vector<std::pair<double, double>> distances;
  if (c.lens_enabled) {
    if (c.magnifications.empty()) throw ValidationError("lens.magnifications: empty");
    const LensSpec lens{c.focal_length, aperture(c)};
    validate(lens);
    if (!(c.focal_length > 0.0)) throw ValidationError("lens.f: imaging needs a converging lens");
    for (double m : c.magnifications) {
      if (!(m > 0.0) || !std::isfinite(m)) throw ValidationError("lens.magnifications: values must be positive");
      const double z1 = c.focal_length * (1.0 + 1.0 / m);
      const double z2 = c.focal_length * (1.0 + m);
      check_imaging_condition(z1, c.focal_length, z2);
      check_guard(c, grid, c.z_reference + z1);
      check_guard(c, grid, c.z_reference, m);
      arms.push_back(OpticalChain::imaging(c.z_reference, z1, lens, z2));
      channels.push_back({0, 0, arms.size() - 1, 0});
      mags.push_back(m);
      distances.emplace_back(z1, z2);
    }
  } else {
    check_guard(c, grid, c.z_reference);
    arms.push_back(OpticalChain::free_space(c.z_reference));
    channels.push_back({0, 0, 1, 0});
    mags.push_back(1.0);
    distances.emplace_back(0.0, 0.0);
  }

  const Apparatus apparatus(grid, arms, {mask}, {detector}, channels);
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));

  DataTable table{"lens_ghost.csv",
                  {"magnification", "z1_m", "z2_m", "peak_lower_m", "peak_upper_m", "separation_m",
                   "expected_separation_m", "max_g2_excess"},
                  {}};
  const double span = std::abs(c.y1 - c.y2);
  std::optional<CorrelationMap> first;
  for (std::size_t ch = 0; ch < channels.size(); ++ch) {
    const auto map = finalize(accs[ch], positions);
    const auto peaks = find_peaks(ghost_image(map), positions);
    double excess = -kInf;
    for (double g : map.g2) {
      if (std::isfinite(g)) excess = std::max(excess, g - 1.0);
    }
    const double m = mags[ch];
    const double sep = peaks.size() == 2 ? peaks[1] - peaks[0] : kNaN;
    const double expected = m * span;
    const std::string tag = "m_" + format_double(c.lens_enabled ? -m : 1.0);
    if (matched) {
      result.verdict.checks.push_back(
          make_check("peak_count_" + tag, static_cast<double>(peaks.size()), 2.0, 2.0, 2.0));
      result.verdict.checks.push_back(
          make_check("peak_separation_" + tag, sep, expected, 0.98 * expected, 1.02 * expected));
    } else {
      // Matched-plane excess for two independent cells is a / A.
      const double matched_excess = window_area(grid, c.detector_side) / mask.open_area();
      result.verdict.checks.push_back(
          make_check("peaks_washed_out_" + tag, excess, matched_excess, -kInf, 0.5 * matched_excess));
    }
    table.rows.push_back({c.lens_enabled ? -m : 1.0, distances[ch].first, distances[ch].second,
                          peaks.size() == 2 ? peaks[0] : kNaN, peaks.size() == 2 ? peaks[1] : kNaN, sep, expected,
                          excess});
    if (!first) first = map;
  }
  result.tables.push_back(std::move(table));
  result.frames = dump_frames(source, apparatus, c);
  finish(result, *first, start);
  return result;
}

ScenarioResult run_near_to_far(const ScenarioConfig& c) {
  if (!(c.source.beam_radius > 0.0)) {
    throw ValidationError("near_to_far: source.beam_radius must be positive to define a Rayleigh range");
  }
  const double zr = effective_rayleigh_range(c.source, c.wavelength);
  std::vector<double> z_list;
  for (double r : c.z_over_rayleigh) z_list.push_back(r * zr);
  return run_near_to_far(c, z_list);
}

ScenarioResult run_near_to_far(const ScenarioConfig& c, const std::vector<double>& z_list) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::none && c.object != ObjectKind::pinhole) {
    throw ValidationError("near_to_far: takes no object (object.kind must be none or pinhole)");
  }
  if (z_list.empty()) throw ValidationError("near_to_far: empty z list");
  auto result = begin("near_to_far", c, "matched");
  const Grid2D grid = c.grid();
  const SpeckleSource source(grid, c.source);
  const double zr = c.source.beam_radius > 0.0 ? effective_rayleigh_range(c.source, c.wavelength) : kInf;
  for (double z : z_list) {
    if (!(z >= 0.0) || !std::isfinite(z)) throw ValidationError("near_to_far: distances must be >= 0");
  }
  check_guard(c, grid, *std::max_element(z_list.begin(), z_list.end()));
  const auto positions = c.scan_positions();

  const double side = window_side(grid, c.detector_side);
  const RectHole pinhole[] = {{0.0, c.scan_y, side, side}};
  const auto mask = make_rect_mask(grid, pinhole);
  const PointDetectorSpec detector{c.detector_side, positions, c.scan_y};
  std::vector<OpticalChain> arms;
  std::vector<Apparatus::Channel> channels;
  for (std::size_t k = 0; k < z_list.size(); ++k) {
    arms.push_back(OpticalChain::free_space(z_list[k]));
    channels.push_back({k, 0, k, 0});
  }
  const Apparatus apparatus(grid, arms, {mask}, {detector}, channels);
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));
  const std::size_t i0 = nearest_index(positions, 0.0, c.scan_step, "equivalent point");

  // Speckle size per plane from the reference-plane intensity ensemble.
  std::vector<SpeckleMetrics> metrics(z_list.size());
  parallel_for(z_list.size(), static_cast<unsigned>(std::min<std::uint64_t>(c.workers, 1024)), [&](std::uint64_t k) {
    SpeckleMetricsAccumulator acc(grid);
    const PropagationSpec prop{z_list[k]};
    for (std::uint64_t r = 0; r < c.metric_frames; ++r) {
      acc.add(intensity(propagate(source.generate(r, c.seed), prop)));
    }
    metrics[k] = acc.finalize();
  });

  DataTable table{"near_to_far.csv",
                  {"z_m", "z_over_rayleigh", "g2_equivalent", "stderr", "speckle_size_m", "speckle_size_gsm_m"},
                  {}};
  std::optional<CorrelationMap> first;
  for (std::size_t k = 0; k < z_list.size(); ++k) {
    const auto map = finalize(accs[k], positions);
    const std::string tag = "z_" + format_double(z_list[k] / zr) + "_zR";
    result.verdict.checks.push_back(make_check("g2_equivalent_" + tag, map.g2[i0], 2.0, 1.9, 2.1));
    table.rows.push_back({z_list[k], z_list[k] / zr, map.g2[i0], map.g2_stderr[i0], metrics[k].correlation_length,
                          c.source.correlation_length * beam_expansion(c.source, c.wavelength, z_list[k])});
    if (!first) first = map;
  }

  // Order planes by distance for the growth checks.
  std::vector<std::size_t> order(z_list.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return z_list[a] < z_list[b]; });
  for (std::size_t n = 1; n < order.size(); ++n) {
    const std::size_t prev = order[n - 1], cur = order[n];
    if (z_list[prev] < zr) continue;  // far end only
    result.verdict.checks.push_back(make_check(
        "speckle_growth_z_" + format_double(z_list[prev] / zr) + "_to_" + format_double(z_list[cur] / zr) + "_zR",
        metrics[cur].correlation_length - metrics[prev].correlation_length, 0.0,
        std::numeric_limits<double>::min(), kInf));
  }
  if (order.size() >= 2) {
    const double l_min = metrics[order.front()].correlation_length;
    const double l_max = metrics[order.back()].correlation_length;
    result.verdict.checks.push_back(
        make_check("speckle_size_far_over_near", l_max / l_min, 1.0, 1.0 + 1e-12, kInf));
  }
  result.tables.push_back(std::move(table));
  result.frames = dump_frames(source, apparatus, c);
  finish(result, *first, start);
  return result;
}

ScenarioResult run_resolution_tradeoff(const ScenarioConfig& c) {
  std::vector<double> sides;
  for (double m : c.side_multiples) sides.push_back(m * c.source.correlation_length);
  return run_resolution_tradeoff(c, sides);
}

ScenarioResult run_resolution_tradeoff(const ScenarioConfig& c, const std::vector<double>& sides) {
  const auto start = Clock::now();
  if (c.object != ObjectKind::two_hole) throw ValidationError("resolution_tradeoff: object.kind must be two_hole");
  if (sides.size() < 2) throw ValidationError("resolution_tradeoff: need at least two detector sides");
  require_small_holes(c);
  require_equal_arms(c, "resolution_tradeoff");
  const Grid2D grid = c.grid();
  if (std::abs(std::abs(c.y1 - c.y2) - 2.5 * c.source.correlation_length) > grid.dx) {
    throw ValidationError("resolution_tradeoff: |y1 - y2| must be 2.5 l_c (within one pixel)");
  }
  for (double s : sides) snapped_side_pixels(s, grid.dx, grid.nx);
  auto result = begin("resolution_tradeoff", c, "matched");
  check_guard(c, grid, c.z_object);
  const SpeckleSource source(grid, c.source);
  const auto positions = c.scan_positions();

  const RectHole holes[] = {{c.y1, c.scan_y, c.hole_side, c.hole_side}, {c.y2, c.scan_y, c.hole_side, c.hole_side}};
  const auto mask = make_rect_mask(grid, holes);
  std::vector<PointDetectorSpec> detectors;
  std::vector<Apparatus::Channel> channels;
  for (std::size_t d = 0; d < sides.size(); ++d) {
    detectors.push_back({sides[d], positions, c.scan_y});
    channels.push_back({0, 0, 0, d});
  }
  const Apparatus apparatus(grid, {OpticalChain::free_space(c.z_object)}, {mask}, detectors, channels);
  const auto accs = run_ensemble(source, apparatus, c.ensemble(), ensemble_options(c));

  const double lo = std::min(c.y1, c.y2), hi = std::max(c.y1, c.y2);
  const std::size_t i1 = nearest_index(positions, lo, c.scan_step, "hole");
  const std::size_t i2 = nearest_index(positions, hi, c.scan_step, "hole");
  const double cell_area = std::pow(source.calibrated_correlation_length(), 2);
  const double exclusion = c.background_margin * coherence_scale(c, c.z_object);

  DataTable table{"resolution_tradeoff.csv",
                  {"side_m", "side_pixels", "effective_A_over_a", "S_measured", "stderr", "S_predicted",
                   "dip_ratio", "resolved"},
                  {}};
  std::vector<ContrastReport> reports;
  std::vector<Resolvability> resolv;
  std::optional<CorrelationMap> first;
  for (std::size_t d = 0; d < sides.size(); ++d) {
    const auto map = finalize(accs[d], positions);
    const double a = window_area(grid, sides[d]);
    const auto background =
        background_region(positions, c.scan_y, mask.open_points(), 0.5 * window_side(grid, sides[d]), exclusion);
    // Two object cells; a detector wider than one cell integrates a / l_c^2 of them.
    const double effective = 2.0 * std::max(1.0, a / cell_area);
    const std::size_t signal[] = {i1, i2};
    const auto report = measured_contrast(map, signal, background, effective * a, a);
    const auto r = resolvability(map, i1, i2);
    table.rows.push_back({sides[d], static_cast<double>(snapped_side_pixels(sides[d], grid.dx, grid.nx)), effective,
                          report.s_measured, report.s_stderr, report.s_predicted, r.ratio,
                          r.ratio >= r.threshold ? 1.0 : 0.0});
    reports.push_back(report);
    resolv.push_back(r);
    if (!first) first = map;
  }

  const std::string first_tag = format_double(sides.front() / c.source.correlation_length);
  const std::string last_tag = format_double(sides.back() / c.source.correlation_length);
  result.verdict.checks.push_back(make_check("resolved_at_side_" + first_tag + "_l_c", resolv.front().ratio, 0.2,
                                             resolv.front().threshold, kInf));
  result.verdict.checks.push_back(
      make_check("unresolved_at_side_" + last_tag + "_l_c", resolv.back().ratio, 0.2, -kInf, 0.2));
  for (std::size_t d = 1; d < reports.size(); ++d) {
    const double joint = std::hypot(reports[d].s_stderr, reports[d - 1].s_stderr);
    result.verdict.checks.push_back(make_check(
        "S_non_increasing_" + format_double(sides[d - 1] / c.source.correlation_length) + "_to_" +
            format_double(sides[d] / c.source.correlation_length) + "_l_c",
        reports[d].s_measured - reports[d - 1].s_measured, 0.0, -kInf, 3.0 * joint));
  }
  result.tables.push_back(std::move(table));
  result.frames = dump_frames(source, apparatus, c);
  finish(result, *first, start);
  return result;
}

const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names = {"equal_plane", "two_hole",    "contrast_sweep",
                                                 "lens_ghost",  "near_to_far", "resolution_tradeoff"};
  return names;
}

ScenarioResult run_scenario(std::string_view name, const ScenarioConfig& config) {
  if (name == "equal_plane") return run_equal_plane(config);
  if (name == "two_hole") return run_two_hole_ghost(config);
  if (name == "contrast_sweep") return run_contrast_sweep(config);
  if (name == "lens_ghost") return run_lens_ghost(config);
  if (name == "near_to_far") return run_near_to_far(config);
  if (name == "resolution_tradeoff") return run_resolution_tradeoff(config);
  default_config(name);  // throws with the registry listing
  throw ValidationError("unknown scenario");
}

}  // namespace ghostsim
