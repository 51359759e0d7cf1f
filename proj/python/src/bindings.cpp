#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>

#include "ghostsim/cell_model.hpp"
#include "ghostsim/config.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/optics.hpp"
#include "ghostsim/runner.hpp"
#include "ghostsim/scenarios.hpp"
#include "ghostsim/speckle.hpp"

namespace py = pybind11;
using namespace ghostsim;

namespace {

using ComplexArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

ComplexArray to_array(const ComplexField& f) {
  ComplexArray out({f.grid().ny, f.grid().nx});
  std::memcpy(out.mutable_data(), f.samples().data(), f.samples().size_bytes());
  return out;
}

ComplexField from_array(const Grid2D& grid, const ComplexArray& a) {
  if (a.ndim() != 2 || static_cast<std::size_t>(a.shape(0)) != grid.ny ||
      static_cast<std::size_t>(a.shape(1)) != grid.nx) {
    throw ValidationError("field array must have shape (ny, nx)");
  }
  ComplexBuffer buf(a.data(), a.data() + a.size());
  return ComplexField(grid, std::move(buf));
}

py::dict verdict_dict(const ScenarioVerdict& v) {
  py::list checks;
  for (const auto& c : v.checks) {
    py::dict d;
    d["name"] = c.name;
    d["measured"] = c.measured;
    d["expected"] = c.expected;
    d["lower"] = c.lower;
    d["upper"] = c.upper;
    d["passed"] = c.passed;
    checks.append(d);
  }
  py::dict out;
  out["scenario"] = v.scenario;
  out["mode"] = v.mode;
  out["seed"] = v.seed;
  out["passed"] = v.passed();
  out["runtime_seconds"] = v.runtime_seconds;
  out["checks"] = checks;
  out["table"] = v.table();
  return out;
}

py::dict result_dict(const ScenarioResult& r) {
  auto out = verdict_dict(r.verdict);
  py::dict tables;
  for (const auto& t : r.tables) {
    py::dict d;
    d["columns"] = t.columns;
    d["rows"] = t.rows;
    tables[py::str(t.filename)] = d;
  }
  out["tables"] = tables;
  out["ghost_image"] = r.ghost_image;
  return out;
}

}  // namespace

PYBIND11_MODULE(_ghostsim, m) {
  m.doc() = "Ghost imaging with pseudo-thermal speckle light";

  auto validation = py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<SamplingError>(m, "SamplingError", validation.ptr());
  py::register_exception<InsufficientDataError>(m, "InsufficientDataError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.def("version", [] { return std::string(version()); });
  m.def("scenario_names", &scenario_names);

  py::class_<Grid2D>(m, "Grid")
      .def(py::init(&make_grid), py::arg("nx"), py::arg("ny"), py::arg("dx"), py::arg("dy"),
           py::arg("wavelength"))
      .def_readonly("nx", &Grid2D::nx)
      .def_readonly("ny", &Grid2D::ny)
      .def_readonly("dx", &Grid2D::dx)
      .def_readonly("dy", &Grid2D::dy)
      .def_readonly("wavelength", &Grid2D::wavelength)
      .def("x", &Grid2D::x)
      .def("y", &Grid2D::y)
      .def("__repr__", [](const Grid2D& g) {
        return "Grid(" + std::to_string(g.nx) + "x" + std::to_string(g.ny) + ", dx=" + format_double(g.dx) +
               ", wavelength=" + format_double(g.wavelength) + ")";
      });

  py::class_<SpeckleSpec>(m, "SpeckleSpec")
      .def(py::init<>())
      .def_readwrite("correlation_length", &SpeckleSpec::correlation_length)
      .def_readwrite("mean_intensity", &SpeckleSpec::mean_intensity)
      .def_readwrite("correlation_time", &SpeckleSpec::correlation_time)
      .def_readwrite("beam_radius", &SpeckleSpec::beam_radius)
      .def_property(
          "method", [](const SpeckleSpec& s) { return std::string(to_string(s.method)); },
          [](SpeckleSpec& s, const std::string& v) { s.method = parse_speckle_method(v); })
      .def_property(
          "screen_correlation_length", [](const SpeckleSpec& s) { return s.diffuser.screen_correlation_length; },
          [](SpeckleSpec& s, double v) { s.diffuser.screen_correlation_length = v; })
      .def_property(
          "phase_rms", [](const SpeckleSpec& s) { return s.diffuser.phase_rms; },
          [](SpeckleSpec& s, double v) { s.diffuser.phase_rms = v; })
      .def_property(
          "diffuser_distance", [](const SpeckleSpec& s) { return s.diffuser.distance; },
          [](SpeckleSpec& s, double v) { s.diffuser.distance = v; });

  m.def(
      "generate_speckle",
      [](const Grid2D& g, const SpeckleSpec& s, std::uint64_t realization, std::uint64_t seed) {
        return to_array(generate_speckle(g, s, realization, seed));
      },
      py::arg("grid"), py::arg("spec"), py::arg("realization"), py::arg("seed"),
      "One speckle realization as a complex (ny, nx) array.");

  m.def(
      "propagate",
      [](const Grid2D& g, const ComplexArray& field, double z) {
        return to_array(propagate(from_array(g, field), {z}));
      },
      py::arg("grid"), py::arg("field"), py::arg("z"), "Angular-spectrum free-space propagation.");

  m.def(
      "intensity_histogram_test",
      [](const std::vector<double>& intensities, std::size_t bins) {
        const auto r = intensity_histogram_test(intensities, bins);
        py::dict d;
        d["samples"] = r.samples;
        d["mean"] = r.mean;
        d["normalized_second_moment"] = r.normalized_second_moment;
        d["ks_distance"] = r.ks_distance;
        d["threshold"] = r.threshold;
        d["passed"] = r.passed;
        return d;
      },
      py::arg("intensities"), py::arg("bins") = 40);

  m.def("predicted_contrast", &predicted_contrast, py::arg("object_area"), py::arg("detector_area"));
  m.def(
      "cell_model_contrast",
      [](std::uint64_t cells, std::uint64_t samples, std::uint64_t seed) {
        const auto r = cell_model_contrast(cells, samples, seed);
        py::dict d;
        d["contrast"] = r.contrast;
        d["contrast_stderr"] = r.contrast_stderr;
        d["g2_correlated"] = r.g2_correlated;
        d["g2_uncorrelated"] = r.g2_uncorrelated;
        return d;
      },
      py::arg("cells"), py::arg("samples"), py::arg("seed"));
  m.def("find_peaks", &find_peaks, py::arg("values"), py::arg("positions"), py::arg("fraction") = 0.5);

  py::class_<ScenarioConfig>(m, "ScenarioConfig")
      .def(py::init<>())
      .def_readwrite("nx", &ScenarioConfig::nx)
      .def_readwrite("ny", &ScenarioConfig::ny)
      .def_readwrite("dx", &ScenarioConfig::dx)
      .def_readwrite("dy", &ScenarioConfig::dy)
      .def_readwrite("wavelength", &ScenarioConfig::wavelength)
      .def_readwrite("source", &ScenarioConfig::source)
      .def_readwrite("realizations", &ScenarioConfig::realizations)
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("workers", &ScenarioConfig::workers)
      .def_readwrite("z_object", &ScenarioConfig::z_object)
      .def_readwrite("z_reference", &ScenarioConfig::z_reference)
      .def_readwrite("lens_enabled", &ScenarioConfig::lens_enabled)
      .def_readwrite("focal_length", &ScenarioConfig::focal_length)
      .def_readwrite("lens_aperture", &ScenarioConfig::lens_aperture)
      .def_readwrite("magnifications", &ScenarioConfig::magnifications)
      .def_property(
          "object", [](const ScenarioConfig& c) { return std::string(to_string(c.object)); },
          [](ScenarioConfig& c, const std::string& v) { c.object = parse_object_kind(v); })
      .def_readwrite("y1", &ScenarioConfig::y1)
      .def_readwrite("y2", &ScenarioConfig::y2)
      .def_readwrite("hole_side", &ScenarioConfig::hole_side)
      .def_readwrite("hole_pitch", &ScenarioConfig::hole_pitch)
      .def_readwrite("detector_side", &ScenarioConfig::detector_side)
      .def_readwrite("scan_start", &ScenarioConfig::scan_start)
      .def_readwrite("scan_stop", &ScenarioConfig::scan_stop)
      .def_readwrite("scan_step", &ScenarioConfig::scan_step)
      .def_readwrite("scan_y", &ScenarioConfig::scan_y)
      .def_readwrite("ratios", &ScenarioConfig::ratios)
      .def_readwrite("z_over_rayleigh", &ScenarioConfig::z_over_rayleigh)
      .def_readwrite("side_multiples", &ScenarioConfig::side_multiples)
      .def_readwrite("metric_frames", &ScenarioConfig::metric_frames)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def_readwrite("dump_frames", &ScenarioConfig::dump_frames)
      .def("grid", &ScenarioConfig::grid)
      .def("scan_positions", &ScenarioConfig::scan_positions)
      .def("__eq__", [](const ScenarioConfig& a, const ScenarioConfig& b) { return a == b; });

  m.def("default_config", &default_config, py::arg("scenario"));
  m.def(
      "parse_config_text",
      [](const std::string& text, const ScenarioConfig& defaults) { return parse_config_text(text, defaults); },
      py::arg("text"), py::arg("defaults") = ScenarioConfig{});
  m.def("write_config", &write_config, py::arg("config"), py::arg("run_settings") = true);

  m.def(
      "run_scenario",
      [](const std::string& name, const ScenarioConfig& config) {
        ScenarioResult r;
        {
          py::gil_scoped_release release;
          r = run_scenario(name, config);
        }
        return result_dict(r);
      },
      py::arg("name"), py::arg("config"), "Runs a scenario in memory; writes nothing.");

  m.def(
      "run",
      [](const std::string& scenario, std::optional<std::filesystem::path> config_path,
         std::optional<std::filesystem::path> output_dir, std::optional<std::uint64_t> seed,
         std::optional<std::uint64_t> realizations, std::optional<std::uint64_t> workers) {
        RunRequest req{scenario, config_path, output_dir, seed, realizations, workers};
        RunSummary s;
        {
          py::gil_scoped_release release;
          s = run(req);
        }
        auto out = verdict_dict(s.verdict);
        out["manifest"] = s.manifest;
        out["config"] = s.config_echo;
        out["output_dir"] = s.config.output_dir;
        out["exit_code"] = s.exit_code();
        return out;
      },
      py::arg("scenario"), py::arg("config_path") = py::none(), py::arg("output_dir") = py::none(),
      py::arg("seed") = py::none(), py::arg("realizations") = py::none(), py::arg("workers") = py::none(),
      "Same as the command line tool: resolves the config, runs, writes outputs.");
}
