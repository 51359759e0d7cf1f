#include <filesystem>
#include <string>

#include "doctest.h"
#include "ghostsim/config.hpp"
#include "ghostsim/error.hpp"
#include "ghostsim/rng.hpp"

using namespace ghostsim;

namespace {

int error_line(std::string_view text) {
  try {
    parse_config_text(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  return -1;
}

}  // namespace

TEST_CASE("units") {
  CHECK(parse_length("80um") == 80e-6);
  CHECK(parse_length("80 \xC2\xB5m") == 80e-6);
  CHECK(parse_length("10 cm") == 0.1);
  CHECK(parse_length("532nm") == 532e-9);
  CHECK(parse_length("1.5mm") == 1.5e-3);
  CHECK(parse_length("-0.25mm") == -0.25e-3);
  CHECK(parse_duration("1ms") == 1e-3);
  CHECK(parse_duration("3 us") == 3e-6);
  CHECK_THROWS_AS(parse_length("80"), ConfigError);
  CHECK_THROWS_AS(parse_length("80 furlong"), ConfigError);
  CHECK_THROWS_AS(parse_length("um"), ConfigError);
  CHECK_THROWS_AS(parse_duration("5m"), ConfigError);
}

TEST_CASE("parse a document") {
  const auto c = parse_config_text(R"(
# comment
[grid]
nx = 128     # trailing comment
dx = 5um
[source]
l_c = 40um
beam_radius = 0.3 mm
method = diffuser
[ensemble]
realizations = 1000
seed = 7
[lens]
enabled = yes
f = 5cm
magnifications = 1, 2.5
[object]
kind = two_hole
[analysis]
ratios = 1,4
[output]
dir = results/run 1
)");
  CHECK(c.nx == 128);
  CHECK(c.ny == 256);
  CHECK(c.dx == 5e-6);
  CHECK(c.source.correlation_length == 40e-6);
  CHECK(c.source.beam_radius == 0.3e-3);
  CHECK(c.source.method == SpeckleMethod::phase_screen_diffuser);
  CHECK(c.realizations == 1000);
  CHECK(c.seed == 7);
  CHECK(c.lens_enabled);
  CHECK(c.focal_length == 0.05);
  CHECK(c.magnifications == std::vector<double>{1.0, 2.5});
  CHECK(c.object == ObjectKind::two_hole);
  CHECK(c.ratios == std::vector<double>{1.0, 4.0});
  CHECK(c.output_dir == "results/run 1");
}

TEST_CASE("errors carry line numbers") {
  CHECK(error_line("[grid]\nnx = 64\n[bogus]\n") == 3);
  CHECK(error_line("[grid]\nnope = 1\n") == 2);
  CHECK(error_line("nx = 1\n") == 1);
  CHECK(error_line("[grid]\n\nnx 64\n") == 3);
  CHECK(error_line("[grid\n") == 1);
  CHECK(error_line("[grid]\ndx = 10\n") == 2);
  CHECK(error_line("[grid]\nnx = 12x\n") == 2);
  CHECK(error_line("[lens]\nenabled = maybe\n") == 2);
  CHECK(error_line("[object]\nkind = triangle\n") == 2);
  CHECK(error_line("[grid]\nnx = 64\n") == -1);
}

TEST_CASE("write_config round-trips the defaults") {
  const ScenarioConfig c;
  CHECK(parse_config_text(write_config(c)) == c);
}

TEST_CASE("write_config without run settings") {
  ScenarioConfig a, b;
  a.workers = 1;
  b.workers = 8;
  a.output_dir = "x";
  b.output_dir = "y";
  CHECK(write_config(a, false) == write_config(b, false));
  CHECK(write_config(a, false).find("workers") == std::string::npos);
  const auto back = parse_config_text(write_config(a, false));
  CHECK(back.workers == ScenarioConfig{}.workers);
  CHECK(back.output_dir == ScenarioConfig{}.output_dir);
  CHECK(back.nx == a.nx);
}

TEST_CASE("write_config round-trips random configurations") {
  Philox4x32 rng(99, 0);
  auto real = [&](double lo, double hi) { return lo + (hi - lo) * rng.uniform(); };
  for (int trial = 0; trial < 200; ++trial) {
    ScenarioConfig c;
    c.nx = 16 + static_cast<std::int64_t>(rng.uniform() * 512);
    c.dx = real(1e-7, 1e-4);
    c.wavelength = real(2e-7, 2e-6);
    c.source.correlation_length = real(1e-6, 1e-3);
    c.source.correlation_time = real(1e-9, 1.0);
    c.source.beam_radius = rng.uniform() < 0.5 ? 0.0 : real(1e-5, 1e-2);
    c.source.method = rng.uniform() < 0.5 ? SpeckleMethod::spectral_synthesis : SpeckleMethod::phase_screen_diffuser;
    c.realizations = static_cast<std::uint64_t>(rng.uniform() * 1e9);
    const auto w = rng.next_block();
    c.seed = (std::uint64_t(w[0]) << 32) | w[1];
    c.z_object = real(0.0, 2.0);
    c.lens_enabled = rng.uniform() < 0.5;
    c.magnifications = {real(0.1, 10.0), real(0.1, 10.0), real(0.1, 10.0)};
    c.object = static_cast<ObjectKind>(trial % 4);
    c.y1 = real(-1e-3, 1e-3);
    c.scan_step = real(1e-7, 1e-4);
    c.ratios.clear();
    c.output_dir = "dir_" + std::to_string(trial);
    CHECK(parse_config_text(write_config(c)) == c);
  }
}

TEST_CASE("files") {
  CHECK_THROWS_AS(parse_config("/nonexistent/ghostsim.cfg"), IoError);
  ScenarioConfig base;
  base.nx = 64;
  const auto c = parse_config_text("[grid]\ndy = 20um\n", base);
  CHECK(c.nx == 64);
  CHECK(c.dy == 20e-6);
}

TEST_CASE("scan positions") {
  ScenarioConfig c;
  c.scan_start = -1e-4;
  c.scan_stop = 1e-4;
  c.scan_step = 1e-5;
  const auto p = c.scan_positions();
  CHECK(p.size() == 21);
  CHECK(p.front() == -1e-4);
  CHECK(p.back() == doctest::Approx(1e-4));
  c.scan_step = 0.0;
  CHECK_THROWS_AS(c.scan_positions(), ValidationError);
  c.scan_step = 1e-5;
  c.scan_stop = -2e-4;
  CHECK_THROWS_AS(c.scan_positions(), ValidationError);
}

TEST_CASE("object kinds") {
  for (auto k : {ObjectKind::none, ObjectKind::pinhole, ObjectKind::two_hole, ObjectKind::hole_array}) {
    CHECK(parse_object_kind(to_string(k)) == k);
  }
  CHECK_THROWS_AS(parse_object_kind("star"), ValidationError);
}

TEST_CASE("format_double is shortest round-trip") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(8e-05) == "8e-05");
  for (double v : {1.0 / 3.0, 532e-9, 1e300, -2.5e-7}) CHECK(std::stod(format_double(v)) == v);
}

#ifdef GHOSTSIM_CONFIG_DIR
TEST_CASE("shipped example configs parse on top of their scenario defaults") {
  int parsed = 0;
  for (const auto& entry : std::filesystem::directory_iterator(GHOSTSIM_CONFIG_DIR)) {
    if (entry.path().extension() != ".cfg") continue;
    CAPTURE(entry.path().string());
    CHECK_NOTHROW(parse_config(entry.path()));
    ++parsed;
  }
  CHECK(parsed >= 6);
}
#endif
